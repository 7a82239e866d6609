"""Environment configuration and its JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any

from ..errors import ConfigurationError

ACTION_SPACES = ("continuous", "discrete", "hybrid")


@dataclass(frozen=True)
class EnvConfig:
    """Geometry, radio, and reward parameters of the relay scenario.

    The base station sits at the center of a square service area with its
    uniform linear array along the x-axis at ground level. The UAV flies at
    a fixed altitude and relays traffic to a ground user.
    """

    antenna_count: int = 64
    wavelength: float = 0.01  # meters (~30 GHz)
    area_side: float = 100.0  # meters
    altitude: float = 50.0  # meters, fixed
    bs_power_max: float = 1.0  # watts
    uav_power_max: float = 0.5  # watts
    noise_power: float = 1e-9  # watts
    episode_steps: int = 100
    max_step_distance: float = 5.0  # meters per step
    rate_weight: float = 1.0
    power_weight: float = 0.3
    violation_penalty: float = 5.0
    action_space: str = "continuous"
    power_levels: int = 3  # levels per transmitter in the discrete table
    user_position: tuple[float, float] | None = None  # fixed user (else seeded)

    def __post_init__(self):
        positives = (
            ("antenna_count", self.antenna_count),
            ("wavelength", self.wavelength),
            ("area_side", self.area_side),
            ("altitude", self.altitude),
            ("bs_power_max", self.bs_power_max),
            ("uav_power_max", self.uav_power_max),
            ("noise_power", self.noise_power),
            ("episode_steps", self.episode_steps),
            ("max_step_distance", self.max_step_distance),
            ("power_levels", self.power_levels),
        )
        for name, value in positives:
            if not value > 0:
                raise ConfigurationError(f"{name} must be positive, got {value!r}")
        for name in ("rate_weight", "power_weight", "violation_penalty"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be nonnegative")
        if self.action_space not in ACTION_SPACES:
            raise ConfigurationError(
                f"action_space must be one of {ACTION_SPACES}, got {self.action_space!r}"
            )
        if self.antenna_count < 2:
            raise ConfigurationError("antenna_count must be at least 2")
        if self.user_position is not None:
            object.__setattr__(self, "user_position", (float(self.user_position[0]), float(self.user_position[1])))

    # -- derived geometry -------------------------------------------------

    @property
    def spacing(self) -> float:
        """Antenna spacing, half a wavelength by construction."""
        return self.wavelength / 2.0

    @property
    def aperture(self) -> float:
        return (self.antenna_count - 1) * self.spacing

    @property
    def bs_position(self) -> tuple[float, float]:
        return (self.area_side / 2.0, self.area_side / 2.0)

    @property
    def obs_dim(self) -> int:
        return 2 * self.antenna_count + 7

    @property
    def n_discrete_actions(self) -> int:
        return 5 * self.power_levels * self.power_levels

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            doc[f.name] = list(value) if isinstance(value, tuple) else value
        return doc

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "EnvConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown EnvConfig keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if kwargs.get("user_position") is not None:
            kwargs["user_position"] = tuple(kwargs["user_position"])
        return cls(**kwargs)
