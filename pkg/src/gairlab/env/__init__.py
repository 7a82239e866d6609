"""Near-field UAV relay environment."""

from .config import ACTION_SPACES, EnvConfig  # noqa: F401
from .channel import (  # noqa: F401
    channel_features,
    element_positions,
    far_field_gain,
    near_field_channel,
    rayleigh_distance,
    two_hop_rate,
)
from .actions import (  # noqa: F401
    ContinuousSpace,
    DecodedAction,
    DiscreteSpace,
    HybridSpace,
    MOVE_NAMES,
    MOVE_OFFSETS,
    N_MOVES,
    action_space_of,
    decode_action,
    discrete_table,
    power_levels,
)
from .relay import (  # noqa: F401
    NearFieldSpawnWarning,
    RelayEnv,
    StepResult,
    WorldState,
    initial_state,
    reward,
    transition,
)
