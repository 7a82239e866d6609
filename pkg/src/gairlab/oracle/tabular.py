"""Brute-force baselines for the relay task.

Two independent sources of ground truth:

* exact finite-horizon value iteration on a tiny discrete instance whose
  states are the UAV's reachable grid positions, and
* exhaustive one-step search over a gridded action space.

Both call the same ``transition`` function the simulator runs, so any gap
between a learned policy and these baselines is a property of the learner,
never of a physics re-implementation.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..env.actions import decode_action
from ..env.channel import channel_features, near_field_channel
from ..env.config import EnvConfig
from ..env.relay import RelayEnv, StepResult, WorldState, transition
from ..errors import ConfigurationError, NumericError

Array = np.ndarray

MAX_GRID_SIDE = 5
MAX_POWER_LEVELS = 3
MAX_HORIZON = 20
MAX_SEARCH_RESOLUTION = 21


@dataclass(frozen=True)
class TabularMdp:
    """The discrete relay environment, enumerated exactly.

    ``positions[s]`` is the UAV location of state ``s``; actions are the
    indices of the environment's own move x power-level table. Dynamics are
    deterministic, so one next-state index and one reward per (s, a) pin the
    whole process down.
    """

    config: EnvConfig
    positions: Array  # (S, 2) UAV xy per state
    user_xy: Array  # (2,)
    next_state: Array  # (S, A) int
    rewards: Array  # (S, A)
    rates: Array  # (S, A) bits/s/Hz
    powers: Array  # (S, A) total watts
    start_index: int
    horizon: int

    @property
    def n_states(self) -> int:
        return self.positions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.next_state.shape[1]


@dataclass(frozen=True)
class ValueTable:
    """Optimal values indexed by (steps remaining, state).

    ``values[m, s]`` is the best achievable return from state ``s`` with
    ``m`` steps left, so ``values[0]`` is identically zero. ``greedy[m-1, s]``
    is an action attaining ``values[m, s]``.
    """

    values: Array  # (T+1, S)
    greedy: Array  # (T, S) int

    @property
    def horizon(self) -> int:
        return self.greedy.shape[0]

    def optimal_return(self, state_index: int) -> float:
        return float(self.values[-1, state_index])

    def bellman_residual(self, mdp: TabularMdp) -> float:
        """Worst-case |V_m(s) - max_a [r(s,a) + V_{m-1}(s')]| over the table.

        Recomputed state by state in plain Python, deliberately not sharing
        the vectorized evaluation order of :func:`value_iteration`.
        """
        worst = 0.0
        for m in range(1, self.horizon + 1):
            for s in range(mdp.n_states):
                best = max(
                    mdp.rewards[s, a] + self.values[m - 1, mdp.next_state[s, a]]
                    for a in range(mdp.n_actions)
                )
                worst = max(worst, abs(float(self.values[m, s]) - best))
        return worst

    def to_csv(self, path: str | Path) -> None:
        """Write rows (state, t, value, greedy-action); t counts steps remaining.

        Rows with t = 0 have no action left to take, so their action field
        is empty.
        """
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["state", "t", "value", "greedy-action"])
            n_states = self.values.shape[1]
            for s in range(n_states):
                for t in range(self.values.shape[0]):
                    action = "" if t == 0 else int(self.greedy[t - 1, s])
                    writer.writerow([s, t, repr(float(self.values[t, s])), action])


def _grid_coordinates(config: EnvConfig) -> Array:
    """Lattice coordinates 0, step, 2*step, ..., area_side along one axis."""
    step = config.max_step_distance
    k = config.area_side / step
    k_int = round(k)
    if abs(k - k_int) > 1e-9 or k_int < 1:
        raise ConfigurationError(
            "tabular oracle needs area_side to be an exact multiple of "
            f"max_step_distance, got side={config.area_side}, step={step}"
        )
    if k_int % 2 != 0:
        raise ConfigurationError(
            "tabular oracle needs the spawn point (the area center) on the "
            f"move lattice, so area_side/max_step_distance must be even, got {k_int}"
        )
    if k_int + 1 > MAX_GRID_SIDE:
        raise ConfigurationError(
            f"tabular oracle supports grids up to {MAX_GRID_SIDE}x{MAX_GRID_SIDE}, "
            f"got {k_int + 1}x{k_int + 1}"
        )
    return np.arange(k_int + 1, dtype=np.float64) * step


def _state_for(config: EnvConfig, uav_xy: Array, user_xy: Array) -> WorldState:
    h = near_field_channel(config, uav_xy)
    mags, phases = channel_features(h)
    return WorldState(
        uav_xy=np.asarray(uav_xy, dtype=np.float64).copy(),
        user_xy=np.asarray(user_xy, dtype=np.float64).copy(),
        bs_power=0.0,
        uav_power=0.0,
        channel_mags=mags,
        channel_phases=phases,
        step_index=0,
    )


def build_tabular_mdp(config: EnvConfig) -> TabularMdp:
    """Enumerate a tiny discrete instance into an exact finite MDP.

    Every (state, action) cell is filled by running the environment's own
    ``transition``, so rewards, rates, and powers here are bit-identical to
    what the simulator would produce for the same inputs.
    """
    if config.action_space != "discrete":
        raise ConfigurationError(
            f"tabular oracle covers the discrete action space only, got {config.action_space!r}"
        )
    if config.power_levels > MAX_POWER_LEVELS:
        raise ConfigurationError(
            f"tabular oracle supports at most {MAX_POWER_LEVELS} power levels "
            f"per transmitter, got {config.power_levels}"
        )
    if config.episode_steps > MAX_HORIZON:
        raise ConfigurationError(
            f"tabular oracle supports horizons up to {MAX_HORIZON}, got {config.episode_steps}"
        )
    if config.user_position is None:
        raise ConfigurationError(
            "tabular oracle needs a fixed user_position; a seeded user would "
            "make the MDP depend on the reset seed"
        )

    coords = _grid_coordinates(config)
    g = coords.shape[0]
    step = config.max_step_distance
    user_xy = np.array(config.user_position, dtype=np.float64)

    positions = np.array([(x, y) for x in coords for y in coords])
    n_states = g * g
    n_actions = config.n_discrete_actions

    def index_of(xy: Array) -> int:
        ij = np.rint(xy / step)
        if np.max(np.abs(ij * step - xy)) > 1e-6 * step:
            raise NumericError(f"position {xy} left the move lattice")
        i, j = int(ij[0]), int(ij[1])
        return i * g + j

    next_state = np.zeros((n_states, n_actions), dtype=np.int64)
    rewards = np.zeros((n_states, n_actions))
    rates = np.zeros((n_states, n_actions))
    powers = np.zeros((n_states, n_actions))
    for s in range(n_states):
        state = _state_for(config, positions[s], user_xy)
        for a in range(n_actions):
            result = transition(config, state, decode_action(config, a))
            next_state[s, a] = index_of(result.state.uav_xy)
            rewards[s, a] = result.reward
            rates[s, a] = result.rate
            powers[s, a] = result.total_power

    bs = np.array(config.bs_position)
    return TabularMdp(
        config=config,
        positions=positions,
        user_xy=user_xy,
        next_state=next_state,
        rewards=rewards,
        rates=rates,
        powers=powers,
        start_index=index_of(bs),
        horizon=config.episode_steps,
    )


def value_iteration(mdp: TabularMdp) -> ValueTable:
    """Backward induction over the exact MDP.

    V_m(s) = max_a [r(s, a) + V_{m-1}(s')] with V_0 = 0; exact for this
    deterministic finite-horizon process. Ties pick the lowest action index,
    so the greedy table is deterministic.
    """
    values = np.zeros((mdp.horizon + 1, mdp.n_states))
    greedy = np.zeros((mdp.horizon, mdp.n_states), dtype=np.int64)
    for m in range(1, mdp.horizon + 1):
        q = mdp.rewards + values[m - 1][mdp.next_state]  # (S, A)
        values[m] = q.max(axis=1)
        greedy[m - 1] = q.argmax(axis=1)
    return ValueTable(values=values, greedy=greedy)


def greedy_rollout(mdp: TabularMdp, table: ValueTable, seed: int = 0) -> float:
    """Run the greedy policy in the real simulator and return its reward sum.

    With deterministic dynamics this must equal ``table.optimal_return``
    at the start state; the equality doubles as an end-to-end check that the
    enumeration and the simulator share physics.
    """
    env = RelayEnv(mdp.config)
    env.reset(seed)
    s = mdp.start_index
    total = 0.0
    for t in range(mdp.horizon):
        remaining = mdp.horizon - t
        action = int(table.greedy[remaining - 1, s])
        result = env.step(action)
        total += result.reward
        s = int(mdp.next_state[s, action])
    return total


@dataclass(frozen=True)
class OneStepSearchResult:
    """Winner of an exhaustive one-step search."""

    action: Array | int  # raw action in the environment's own encoding
    reward: float
    step: StepResult


def _candidate_actions(config: EnvConfig, resolution: int):
    axis = np.linspace(-1.0, 1.0, resolution)
    if config.action_space == "discrete":
        yield from range(config.n_discrete_actions)
    elif config.action_space == "continuous":
        for raw in itertools.product(axis, repeat=4):
            yield np.array(raw)
    else:  # hybrid
        for move in range(5):
            for p_bs, p_uav in itertools.product(axis, repeat=2):
                yield np.array([move, p_bs, p_uav])


def exhaustive_one_step(
    config: EnvConfig, state: WorldState, resolution: int = 11
) -> OneStepSearchResult:
    """Grid-search the action space for the best immediate reward.

    Continuous components are gridded with ``resolution`` points over
    [-1, 1]; discrete actions are enumerated outright. Each candidate is
    scored by the environment's own ``transition``. Ties keep the earliest
    candidate, so the result is deterministic.
    """
    if not 2 <= resolution <= MAX_SEARCH_RESOLUTION:
        raise ConfigurationError(
            f"resolution must be in [2, {MAX_SEARCH_RESOLUTION}], got {resolution}"
        )
    best: OneStepSearchResult | None = None
    for raw in _candidate_actions(config, resolution):
        result = transition(config, state, decode_action(config, raw))
        if best is None or result.reward > best.reward:
            best = OneStepSearchResult(action=raw, reward=result.reward, step=result)
    assert best is not None  # the candidate generator is never empty
    return best
