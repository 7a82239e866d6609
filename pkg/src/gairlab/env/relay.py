"""The UAV relay environment: state, reward, reset/step dynamics.

Dynamics are deterministic given geometry; the only randomness is the
seeded user placement at reset. ``transition`` is a pure function so the
tabular oracle can enumerate exactly the same physics the simulator runs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from ..errors import UsageError
from .actions import DecodedAction, decode_action
from .channel import channel_features, far_field_gain, near_field_channel, rayleigh_distance
from .config import EnvConfig

Array = np.ndarray


class NearFieldSpawnWarning(UserWarning):
    """The UAV spawns outside the array's Rayleigh region for this config."""


_WARNED_CONFIGS: set[tuple[int, float, float]] = set()


@dataclass(frozen=True)
class WorldState:
    uav_xy: Array  # (2,)
    user_xy: Array  # (2,)
    bs_power: float  # previously applied, watts
    uav_power: float
    channel_mags: Array  # (N,)
    channel_phases: Array  # (N,), consecutive-difference phases in (-pi, pi]
    step_index: int

    def observe(self, config: EnvConfig) -> Array:
        """Flat observation of length 2N + 7, scaled to O(1) ranges."""
        side = config.area_side
        # magnitudes scaled so a boresight element at spawn altitude is ~1
        mag_scale = 4.0 * np.pi * config.altitude / config.wavelength
        return np.concatenate(
            [
                self.uav_xy / side,
                self.user_xy / side,
                [
                    self.bs_power / config.bs_power_max,
                    self.uav_power / config.uav_power_max,
                    self.step_index / config.episode_steps,
                ],
                self.channel_mags * mag_scale,
                self.channel_phases / np.pi,
            ]
        )


@dataclass(frozen=True)
class StepResult:
    state: WorldState
    reward: float
    rate: float  # bits/s/Hz
    total_power: float  # watts
    violation: bool
    done: bool


def reward(config: EnvConfig, rate: float, p_bs: float, p_uav: float, violation: bool) -> float:
    """rate term minus normalized power draw minus violation penalty."""
    power_norm = (p_bs + p_uav) / (config.bs_power_max + config.uav_power_max)
    return (
        config.rate_weight * rate
        - config.power_weight * power_norm
        - (config.violation_penalty if violation else 0.0)
    )


def _state_at(config: EnvConfig, uav_xy: Array, user_xy: Array, p_bs: float, p_uav: float, step_index: int) -> WorldState:
    h = near_field_channel(config, uav_xy)
    mags, phases = channel_features(h)
    return WorldState(
        uav_xy=uav_xy.copy(),
        user_xy=user_xy.copy(),
        bs_power=float(p_bs),
        uav_power=float(p_uav),
        channel_mags=mags,
        channel_phases=phases,
        step_index=step_index,
    )


def initial_state(config: EnvConfig, seed: int) -> WorldState:
    """UAV at the area center; user seeded at distance >= 0.8 * side from the BS.

    The user may land outside the UAV's service square: the square bounds
    the UAV trajectory, while the user only needs to be far enough away to
    sit firmly in the UAV's far field.
    """
    bs = np.array(config.bs_position)
    uav = bs.copy()
    if config.user_position is not None:
        user = np.array(config.user_position, dtype=np.float64)
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        for _ in range(10000):
            user = bs + rng.uniform(-config.area_side, config.area_side, size=2)
            if np.hypot(*(user - bs)) >= 0.8 * config.area_side:
                break
        else:  # pragma: no cover - p(reject) per draw is ~0.6
            raise UsageError("could not sample a user position satisfying the distance floor")

    spawn_range = float(np.hypot(np.hypot(*(uav - bs)), config.altitude))
    boundary = rayleigh_distance(config.aperture, config.wavelength)
    key = (config.antenna_count, config.wavelength, config.altitude)
    if spawn_range > boundary and key not in _WARNED_CONFIGS:
        _WARNED_CONFIGS.add(key)
        warnings.warn(
            f"UAV spawn range {spawn_range:.1f} m exceeds the Rayleigh distance "
            f"{boundary:.1f} m for N={config.antenna_count}; the spherical-wave "
            "model stays exact but the geometry is not near-field",
            NearFieldSpawnWarning,
            stacklevel=2,
        )
    return _state_at(config, uav, user, 0.0, 0.0, 0)


def transition(config: EnvConfig, state: WorldState, decoded: DecodedAction) -> StepResult:
    """Pure one-step dynamics from an already-decoded action."""
    if state.step_index >= config.episode_steps:
        raise UsageError("episode is done; reset before stepping again")
    side = config.area_side
    attempted = state.uav_xy + np.array([decoded.dx, decoded.dy])
    out_of_area = bool((attempted < 0.0).any() or (attempted > side).any())
    move_violation = decoded.move_checks_area and out_of_area
    new_uav = np.clip(attempted, 0.0, side)

    h = near_field_channel(config, new_uav)
    gain = far_field_gain(config, new_uav, state.user_xy)
    from .channel import two_hop_rate  # local import keeps module init cycle-free

    rate = two_hop_rate(h, gain, decoded.p_bs, decoded.p_uav, config.noise_power)
    violation = move_violation or decoded.power_violation
    r = reward(config, rate, decoded.p_bs, decoded.p_uav, violation)

    mags, phases = channel_features(h)
    next_state = WorldState(
        uav_xy=new_uav,
        user_xy=state.user_xy.copy(),
        bs_power=decoded.p_bs,
        uav_power=decoded.p_uav,
        channel_mags=mags,
        channel_phases=phases,
        step_index=state.step_index + 1,
    )
    return StepResult(
        state=next_state,
        reward=float(r),
        rate=float(rate),
        total_power=float(decoded.p_bs + decoded.p_uav),
        violation=violation,
        done=next_state.step_index >= config.episode_steps,
    )


class RelayEnv:
    """Stateful wrapper over the pure dynamics, one episode at a time."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self.state: WorldState | None = None

    @property
    def obs_dim(self) -> int:
        return self.config.obs_dim

    def reset(self, seed: int) -> Array:
        self.state = initial_state(self.config, seed)
        return self.state.observe(self.config)

    def step(self, raw_action) -> StepResult:
        if self.state is None:
            raise UsageError("call reset() before step()")
        decoded = decode_action(self.config, raw_action)
        result = transition(self.config, self.state, decoded)
        self.state = result.state
        return result
