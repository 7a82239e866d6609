"""TD3 hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any

from ..errors import ConfigurationError


@dataclass(frozen=True)
class Td3Config:
    gamma: float = 0.99
    tau: float = 0.005
    policy_delay: int = 2
    exploration_noise: float = 0.1  # sigma of Gaussian acting noise
    target_noise: float = 0.2  # sigma of target smoothing noise
    noise_clip: float = 0.5
    batch_size: int = 256
    update_every: int = 1  # gradient step once per this many update() calls
    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    hidden_sizes: tuple[int, ...] = (64, 64)
    buffer_capacity: int = 100_000
    warmup_steps: int = 1000
    # epsilon-greedy schedule for discrete-mode exploration:
    # linear eps_start -> eps_end over the first eps_fraction of env steps
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_fraction: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ConfigurationError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigurationError(f"tau must be in (0, 1], got {self.tau}")
        if self.policy_delay < 1:
            raise ConfigurationError(f"policy_delay must be >= 1, got {self.policy_delay}")
        if self.update_every < 1:
            raise ConfigurationError(f"update_every must be >= 1, got {self.update_every}")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.buffer_capacity < 1:
            raise ConfigurationError("buffer_capacity must be >= 1")
        if min(self.exploration_noise, self.target_noise, self.noise_clip) < 0:
            raise ConfigurationError("noise scales must be nonnegative")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ConfigurationError("need 0 <= eps_end <= eps_start <= 1")
        if not 0.0 < self.eps_fraction <= 1.0:
            raise ConfigurationError("eps_fraction must be in (0, 1]")
        if self.warmup_steps < 0:
            raise ConfigurationError("warmup_steps must be nonnegative")
        if isinstance(self.hidden_sizes, list):
            object.__setattr__(self, "hidden_sizes", tuple(self.hidden_sizes))
        if any(h < 1 for h in self.hidden_sizes) or not self.hidden_sizes:
            raise ConfigurationError("hidden_sizes must be a nonempty tuple of positives")

    def epsilon_at(self, step: int, total_steps: int) -> float:
        """Linear epsilon decay over the first eps_fraction of the run."""
        horizon = max(1.0, self.eps_fraction * total_steps)
        frac = min(1.0, step / horizon)
        return self.eps_start + (self.eps_end - self.eps_start) * frac

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            doc[f.name] = list(value) if isinstance(value, tuple) else value
        return doc

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Td3Config":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown Td3Config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if "hidden_sizes" in kwargs:
            kwargs["hidden_sizes"] = tuple(kwargs["hidden_sizes"])
        return cls(**kwargs)
