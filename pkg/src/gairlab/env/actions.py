"""Agent-facing action spaces and their decoding into physical commands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ShapeError, UsageError
from .config import EnvConfig

Array = np.ndarray

MOVE_NAMES = ("stay", "north", "south", "east", "west")
# unit displacement per move, scaled by max_step_distance
MOVE_OFFSETS = np.array([[0.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]])
N_MOVES = 5


@dataclass(frozen=True)
class ContinuousSpace:
    """Raw action [dx, dy, p_bs, p_uav], all components in [-1, 1]."""

    kind: str = "continuous"
    raw_dim: int = 4


@dataclass(frozen=True)
class DiscreteSpace:
    """Raw action: one index into the move x bs-level x uav-level table."""

    n_actions: int
    kind: str = "discrete"
    raw_dim: int = 1


@dataclass(frozen=True)
class HybridSpace:
    """Raw action [move_index, p_bs, p_uav] with continuous powers."""

    kind: str = "hybrid"
    raw_dim: int = 3
    n_moves: int = N_MOVES
    param_dim: int = 2


def action_space_of(config: EnvConfig):
    if config.action_space == "continuous":
        return ContinuousSpace()
    if config.action_space == "discrete":
        return DiscreteSpace(n_actions=config.n_discrete_actions)
    return HybridSpace()


def power_levels(config: EnvConfig) -> Array:
    """Discrete power fractions (i+1)/L of max, e.g. {1/3, 2/3, 1} for L=3."""
    levels = config.power_levels
    return (np.arange(1, levels + 1) / levels).astype(np.float64)


def discrete_table(config: EnvConfig) -> list[tuple[int, float, float]]:
    """Full enumerated table: (move_index, p_bs, p_uav) per action index."""
    fracs = power_levels(config)
    table = []
    for move in range(N_MOVES):
        for f_bs in fracs:
            for f_uav in fracs:
                table.append((move, float(f_bs * config.bs_power_max), float(f_uav * config.uav_power_max)))
    return table


@dataclass(frozen=True)
class DecodedAction:
    """Physical command produced from a raw agent action.

    ``power_violation`` is judged before clamping. ``move_checks_area``
    tells the stepper whether leaving the area counts as a violation:
    continuous displacements do, table moves (discrete/hybrid) are legal by
    construction and simply clamp at the boundary.
    """

    dx: float
    dy: float
    p_bs: float
    p_uav: float
    power_violation: bool
    move_checks_area: bool


def _affine_power(raw: float, p_max: float) -> tuple[float, bool]:
    decoded = (raw + 1.0) / 2.0 * p_max
    violated = decoded < 0.0 or decoded > p_max
    return float(np.clip(decoded, 0.0, p_max)), violated


def decode_action(config: EnvConfig, raw) -> DecodedAction:
    """Map a raw agent action to displacement + transmit powers."""
    kind = config.action_space
    step = config.max_step_distance

    if kind == "discrete":
        index = int(np.asarray(raw).reshape(()))
        table = discrete_table(config)
        if not 0 <= index < len(table):
            raise UsageError(f"discrete action index {index} outside [0, {len(table)})")
        move, p_bs, p_uav = table[index]
        off = MOVE_OFFSETS[move] * step
        return DecodedAction(off[0], off[1], p_bs, p_uav, power_violation=False, move_checks_area=False)

    raw = np.asarray(raw, dtype=np.float64).reshape(-1)

    if kind == "continuous":
        if raw.shape != (4,):
            raise ShapeError(f"continuous actions have 4 components, got {raw.shape}")
        dx = float(np.clip(raw[0], -1.0, 1.0)) * step
        dy = float(np.clip(raw[1], -1.0, 1.0)) * step
        p_bs, v1 = _affine_power(raw[2], config.bs_power_max)
        p_uav, v2 = _affine_power(raw[3], config.uav_power_max)
        return DecodedAction(dx, dy, p_bs, p_uav, power_violation=v1 or v2, move_checks_area=True)

    if kind == "hybrid":
        if raw.shape != (3,):
            raise ShapeError(f"hybrid actions have 3 components, got {raw.shape}")
        move = int(round(raw[0]))
        if not 0 <= move < N_MOVES:
            raise UsageError(f"hybrid move index {move} outside [0, {N_MOVES})")
        off = MOVE_OFFSETS[move] * step
        p_bs, v1 = _affine_power(raw[1], config.bs_power_max)
        p_uav, v2 = _affine_power(raw[2], config.uav_power_max)
        return DecodedAction(off[0], off[1], p_bs, p_uav, power_violation=v1 or v2, move_checks_area=False)

    raise ConfigurationError(f"unknown action space {kind!r}")
