"""Run matrices: the Cartesian product of stacks x action spaces x seeds.

Each (stack, space) pair becomes one experiment directory under the base
output directory; each seed inside it is fully isolated (own environment,
own agent, own files). A single ``manifest.json`` indexing every run is
written once, after all runs finish.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from ..errors import ConfigurationError
from ..plugins.stack import FLAG_ORDER, EnhancementStack
from .config import RunConfig
from .run import run_experiment

MANIFEST_NAME = "manifest.json"

_SHORT_CODES = {
    "gdm": "gdm_policy",
    "gan": "gan_critic",
    "tfa": "transformer_actor",
    "tfd": "transformer_denoiser",
    "vae": "vae_state",
    "hyb": "vae_hybrid_action",
}


def stack_from_label(label: str, base: EnhancementStack | None = None) -> EnhancementStack:
    """Build a stack from a short label like 'vanilla' or 'gdm+gan+vae'.

    Flags come from the label alone; every knob (step counts, weights,
    dimensions) is inherited from ``base``.
    """
    base = base if base is not None else EnhancementStack()
    flags = {name: False for name in FLAG_ORDER}
    label = label.strip()
    if label != "vanilla":
        for code in label.split("+"):
            code = code.strip()
            if code not in _SHORT_CODES:
                raise ConfigurationError(
                    f"unknown stack code {code!r}; known: vanilla, {', '.join(_SHORT_CODES)}"
                )
            flags[_SHORT_CODES[code]] = True
    return replace(base, **flags)


def sweep(
    base: RunConfig,
    stacks: Sequence[EnhancementStack | str],
    spaces: Sequence[str],
) -> Path:
    """Execute every stack x space x seed combination; return the manifest path.

    ``base`` supplies the environment, TD3 settings, episode/seed plan, and
    the root output directory; each combination writes into its own
    ``<label>_<space>`` subdirectory.
    """
    if not stacks or not spaces:
        raise ConfigurationError("sweep needs at least one stack and one space")
    resolved_stacks = [
        stack_from_label(s, base.stack) if isinstance(s, str) else s for s in stacks
    ]

    root = base.resolved_output_dir()
    entries: list[dict] = []
    for stack in resolved_stacks:
        for space in spaces:
            label = stack.label()
            run_dir = f"{label}_{space}"
            config = replace(
                base,
                env=replace(base.env, action_space=space),
                stack=stack,
                output_dir=str(Path(base.output_dir) / run_dir),
            )
            records = run_experiment(config)
            for record in records:
                seed_dir = Path(run_dir) / f"seed-{record.seed}"
                entries.append(
                    {
                        "stack": label,
                        "space": space,
                        "seed": record.seed,
                        "episodes": config.episodes,
                        "config": f"{run_dir}/config.json",
                        "metrics": f"{seed_dir}/metrics.jsonl",
                        "timing": f"{seed_dir}/timing.json",
                        "summary": f"{seed_dir}/summary.json",
                        "checkpoint": f"{seed_dir}/checkpoint.npz",
                    }
                )

    manifest_path = root / MANIFEST_NAME
    manifest = {
        "stacks": [s.label() for s in resolved_stacks],
        "spaces": list(spaces),
        "seeds": list(base.seeds),
        "runs": entries,
    }
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest_path


def load_manifest(path: str | Path) -> dict:
    path = Path(path)
    doc = json.loads(path.read_text())
    if "runs" not in doc or not isinstance(doc["runs"], list):
        raise ConfigurationError(f"{path}: not a sweep manifest (no 'runs' list)")
    return doc
