"""TD3 core: replay, twin critics, delayed policies, training loop."""

from .buffer import Batch, ReplayBuffer, Transition  # noqa: F401
from .config import Td3Config  # noqa: F401
from .loop import EpisodeRow, EvalRow, LoopResult, run_eval, train_loop  # noqa: F401
from .spaces import (  # noqa: F401
    AgentSpace,
    agent_space_for,
    blocks_to_index,
    critic_repr,
    logits_to_discrete_index,
    one_hot,
)
from .td3 import (  # noqa: F401
    DeterministicActorPolicy,
    Td3Agent,
    TwinCritic,
    bellman_target,
    soft_update,
)
