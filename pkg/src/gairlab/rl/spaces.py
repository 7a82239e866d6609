"""Agent-facing action-space geometry shared by policies and critics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.actions import N_MOVES
from ..env.config import EnvConfig
from ..errors import ConfigurationError

Array = np.ndarray


@dataclass(frozen=True)
class AgentSpace:
    """Resolved dimensions of what the agent emits and the critic consumes.

    ``head_dim`` is the actor-head width; ``action_dim`` is the flat width
    stored in the replay buffer; ``critic_repr_dim`` is the action-input
    width for value networks (0 means the critic is head-style, one output
    per enumerable action). ``blocks`` factorizes the discrete table into
    (moves, bs-levels, uav-levels) for logit-space policies.
    """

    kind: str
    head_dim: int
    action_dim: int
    critic_repr_dim: int
    n_actions: int = 0
    blocks: tuple[int, ...] = ()
    n_moves: int = 0
    param_dim: int = 0


def agent_space_for(config: EnvConfig, *, hybrid_z_dim: int | None = None) -> AgentSpace:
    """The agent's view of an environment's action space.

    ``hybrid_z_dim`` swaps the hybrid power components for a learned latent
    of that width (the decoder lives outside this module).
    """
    kind = config.action_space
    if kind == "continuous":
        if hybrid_z_dim is not None:
            raise ConfigurationError("hybrid_z_dim only applies to the hybrid space")
        return AgentSpace(kind, head_dim=4, action_dim=4, critic_repr_dim=4)
    if kind == "discrete":
        if hybrid_z_dim is not None:
            raise ConfigurationError("hybrid_z_dim only applies to the hybrid space")
        levels = config.power_levels
        n = config.n_discrete_actions
        return AgentSpace(
            kind,
            head_dim=n,
            action_dim=1,
            critic_repr_dim=0,
            n_actions=n,
            blocks=(N_MOVES, levels, levels),
        )
    param_dim = 2 if hybrid_z_dim is None else int(hybrid_z_dim)
    return AgentSpace(
        "hybrid",
        head_dim=N_MOVES + param_dim,
        action_dim=1 + param_dim,
        critic_repr_dim=N_MOVES + param_dim,
        n_moves=N_MOVES,
        param_dim=param_dim,
    )


def one_hot(indices: Array, n: int) -> Array:
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    out = np.zeros((indices.shape[0], n))
    out[np.arange(indices.shape[0]), indices] = 1.0
    return out


def critic_repr(space: AgentSpace, actions: Array) -> Array:
    """Batch of stored actions -> critic action-input representation."""
    actions = np.atleast_2d(actions)
    if space.kind == "continuous":
        return actions
    if space.kind == "hybrid":
        moves = one_hot(actions[:, 0], space.n_moves)
        return np.concatenate([moves, actions[:, 1:]], axis=1)
    raise ConfigurationError("discrete critics are head-style; no action repr exists")


def block_slices(blocks: tuple[int, ...]) -> list[slice]:
    out, start = [], 0
    for width in blocks:
        out.append(slice(start, start + width))
        start += width
    return out


def blocks_to_index(blocks: tuple[int, ...], choices: Array) -> Array:
    """(move, bs-level, uav-level) choices -> flat table indices."""
    _, l1, l2 = blocks
    return choices[:, 0] * (l1 * l2) + choices[:, 1] * l2 + choices[:, 2]


def logits_to_discrete_index(blocks: tuple[int, ...], head: Array) -> Array:
    """Per-block argmax over a factored-logit head, then flatten."""
    head = np.atleast_2d(head)
    choices = np.stack(
        [head[:, s].argmax(axis=1) for s in block_slices(blocks)], axis=1
    )
    return blocks_to_index(blocks, choices)
