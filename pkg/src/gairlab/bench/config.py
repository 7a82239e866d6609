"""Experiment configuration: one JSON document describing a full run.

A run config bundles the environment, the TD3 hyperparameters, the
enhancement stack, and the execution plan (episodes, seeds, output
directory, evaluation cadence). ``validate_config`` parses a file into a
:class:`RunConfig`, collecting *every* violation — each tagged with its
path into the document — instead of stopping at the first.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from ..env.config import EnvConfig
from ..errors import ConfigurationError
from ..plugins.stack import EnhancementStack
from ..rl.config import Td3Config

OUTPUT_ROOT_ENV_VAR = "GAIRLAB_OUTPUT_ROOT"


class ConfigValidationError(ConfigurationError):
    """One or more config violations; ``violations`` lists them all."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} config violation(s):\n{lines}")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to execute one experiment on a list of seeds."""

    env: EnvConfig = field(default_factory=EnvConfig)
    td3: Td3Config = field(default_factory=Td3Config)
    stack: EnhancementStack = field(default_factory=EnhancementStack)
    episodes: int = 100
    seeds: tuple[int, ...] = (0,)
    output_dir: str = "runs"
    eval_every: int = 10  # 0 disables periodic evaluation
    eval_episodes: int = 5

    def __post_init__(self):
        if isinstance(self.seeds, list):
            object.__setattr__(self, "seeds", tuple(self.seeds))
        if self.episodes < 1:
            raise ConfigurationError(f"episodes must be >= 1, got {self.episodes}")
        if not self.seeds:
            raise ConfigurationError("seeds must be a nonempty list")
        if any(not isinstance(s, int) or isinstance(s, bool) for s in self.seeds):
            raise ConfigurationError(f"seeds must be integers, got {self.seeds!r}")
        if self.eval_every < 0:
            raise ConfigurationError(f"eval_every must be >= 0, got {self.eval_every}")
        if self.eval_episodes < 1:
            raise ConfigurationError(f"eval_episodes must be >= 1, got {self.eval_episodes}")
        self.stack.validate_for_space(self.env.action_space)

    @property
    def total_env_steps(self) -> int:
        return self.episodes * self.env.episode_steps

    def resolved_output_dir(self) -> Path:
        """Output directory, rooted at $GAIRLAB_OUTPUT_ROOT when relative."""
        path = Path(self.output_dir)
        root = os.environ.get(OUTPUT_ROOT_ENV_VAR)
        if root and not path.is_absolute():
            return Path(root) / path
        return path

    def to_dict(self) -> dict[str, Any]:
        return {
            "env": self.env.to_dict(),
            "td3": self.td3.to_dict(),
            "stack": self.stack.to_dict(),
            "episodes": self.episodes,
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "eval_every": self.eval_every,
            "eval_episodes": self.eval_episodes,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown RunConfig keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {
            k: v for k, v in doc.items() if k not in ("env", "td3", "stack")
        }
        if "env" in doc:
            kwargs["env"] = EnvConfig.from_dict(doc["env"])
        if "td3" in doc:
            kwargs["td3"] = Td3Config.from_dict(doc["td3"])
        if "stack" in doc:
            kwargs["stack"] = EnhancementStack.from_dict(doc["stack"])
        if "seeds" in kwargs:
            kwargs["seeds"] = tuple(kwargs["seeds"])
        return cls(**kwargs)


_SECTIONS = {"env": EnvConfig, "td3": Td3Config, "stack": EnhancementStack}
_TOP_LEVEL = ("episodes", "seeds", "output_dir", "eval_every", "eval_episodes")


def validate_document(doc: Any, *, source: str = "<config>") -> RunConfig:
    """Turn a parsed JSON document into a RunConfig or list every violation."""
    violations: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigValidationError([f"{source}: top level must be a JSON object"])

    for key in sorted(set(doc) - set(_SECTIONS) - set(_TOP_LEVEL)):
        violations.append(f"{key}: unknown key")

    sections: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        raw = doc.get(name, {})
        if not isinstance(raw, dict):
            violations.append(f"{name}: must be a JSON object")
            continue
        try:
            sections[name] = cls.from_dict(raw)
        except ConfigurationError as exc:
            violations.append(f"{name}: {exc}")

    # cross-section rules, checked from the raw values so they surface even
    # when a section failed to build for an unrelated reason
    stack_raw = doc.get("stack", {})
    env_raw = doc.get("env", {})
    if isinstance(stack_raw, dict) and isinstance(env_raw, dict):
        space = env_raw.get("action_space", "continuous")
        if stack_raw.get("vae_hybrid_action") and space != "hybrid":
            violations.append(
                "stack.vae_hybrid_action: requires env.action_space == 'hybrid', "
                f"got {space!r}"
            )

    top = {k: doc[k] for k in _TOP_LEVEL if k in doc}
    config: RunConfig | None = None
    if not violations and all(name in sections for name in _SECTIONS):
        try:
            config = RunConfig(
                env=sections["env"], td3=sections["td3"], stack=sections["stack"], **top
            )
        except (ConfigurationError, TypeError) as exc:
            violations.append(f"{source}: {exc}")
    else:
        # still surface top-level violations when a section already failed
        # (defaulted sections are always mutually compatible)
        try:
            RunConfig(**top)
        except (ConfigurationError, TypeError) as exc:
            violations.append(f"{source}: {exc}")

    if violations:
        raise ConfigValidationError(violations)
    assert config is not None
    return config


def validate_config(path: str | Path) -> RunConfig:
    """Parse and validate a JSON config file; report all violations at once."""
    path = Path(path)
    if not path.is_file():
        raise ConfigValidationError([f"{path}: file not found"])
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"{path}: invalid JSON: {exc}"]) from exc
    return validate_document(doc, source=str(path))
