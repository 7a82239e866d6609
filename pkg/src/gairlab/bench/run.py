"""Seeded experiment execution and metrics persistence.

One experiment = one config x one seed list. Every seed gets its own
directory with four files:

* ``metrics.jsonl``  — per-episode training rows and periodic eval rows.
  Fully determined by (config, seed): rerunning reproduces it byte for byte.
* ``timing.json``    — the wall-clock sidecar (cumulative seconds per
  episode plus the total). Timing lives apart precisely so the other files
  stay byte-reproducible.
* ``summary.json``   — accounting totals and the final-window median reward.
* ``checkpoint.npz`` — final parameters of every component, by name.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..env.relay import RelayEnv
from ..errors import UsageError
from ..plugins.stack import compose_agent
from ..rl.loop import LoopResult, train_loop
from ..seeding import SeedBank
from .config import RunConfig

FINAL_WINDOW_FRACTION = 0.1
SMOOTHING_WINDOW = 20
CURVE_METRICS = ("reward", "rate", "power")


def _dump_json(doc, path: Path, *, indent: int | None = 2) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=indent) + "\n")


def _dump_jsonl(rows, path: Path) -> None:
    lines = [json.dumps(row, sort_keys=True, separators=(",", ":")) for row in rows]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


@dataclass(frozen=True)
class SeedRunPaths:
    root: Path

    @property
    def metrics(self) -> Path:
        return self.root / "metrics.jsonl"

    @property
    def timing(self) -> Path:
        return self.root / "timing.json"

    @property
    def summary(self) -> Path:
        return self.root / "summary.json"

    @property
    def checkpoint(self) -> Path:
        return self.root / "checkpoint.npz"


@dataclass(frozen=True)
class SeedRunRecord:
    """In-memory result of one (config, seed) execution."""

    seed: int
    result: LoopResult
    paths: SeedRunPaths
    summary: dict


def run_paths(config: RunConfig, seed: int) -> SeedRunPaths:
    return SeedRunPaths(root=config.resolved_output_dir() / f"seed-{seed}")


def _metrics_rows(result: LoopResult, episode_steps: int) -> list[dict]:
    rows: list[dict] = []
    evals = {row.episode: row for row in result.evals}
    for row in result.episodes:
        rows.append(
            {
                "kind": "train",
                "episode": row.episode,
                "reward": row.reward,
                "mean_rate": row.mean_rate,
                "mean_power": row.mean_power,
                "violations": row.violations,
                "env_steps": (row.episode + 1) * episode_steps,
            }
        )
        if row.episode in evals:
            ev = evals[row.episode]
            rows.append(
                {
                    "kind": "eval",
                    "episode": ev.episode,
                    "reward": ev.reward,
                    "mean_rate": ev.mean_rate,
                    "mean_power": ev.mean_power,
                }
            )
    return rows


def run_single_seed(config: RunConfig, seed: int, *, clock=time.perf_counter) -> SeedRunRecord:
    """Execute one seed of an experiment and persist its artifacts."""
    env = RelayEnv(config.env)
    agent = compose_agent(
        config.env, config.stack, config.td3, seed, total_steps=config.total_env_steps
    )
    result = train_loop(
        env,
        agent,
        config.episodes,
        SeedBank(seed),
        eval_every=config.eval_every,
        eval_episodes=config.eval_episodes,
        clock=clock,
    )

    paths = run_paths(config, seed)
    paths.root.mkdir(parents=True, exist_ok=True)
    _dump_jsonl(_metrics_rows(result, config.env.episode_steps), paths.metrics)
    _dump_json(
        {"elapsed": result.elapsed, "total_seconds": result.total_seconds},
        paths.timing,
        indent=None,
    )
    summary = {
        "seed": seed,
        "label": config.stack.label(),
        "action_space": config.env.action_space,
        "episodes": config.episodes,
        "env_steps": result.env_steps,
        "critic_updates": result.critic_updates,
        "actor_updates": result.actor_updates,
        "final_window_median_reward": result.final_window_median(FINAL_WINDOW_FRACTION),
        "final_eval_reward": result.evals[-1].reward if result.evals else None,
    }
    _dump_json(summary, paths.summary)
    np.savez(paths.checkpoint, **{k: v.data for k, v in agent.named_params().items()})
    return SeedRunRecord(seed=seed, result=result, paths=paths, summary=summary)


def run_experiment(config: RunConfig, *, clock=time.perf_counter) -> list[SeedRunRecord]:
    """Run every seed of the experiment; one artifact directory per seed."""
    out_root = config.resolved_output_dir()
    out_root.mkdir(parents=True, exist_ok=True)
    _dump_json(config.to_dict(), out_root / "config.json")
    return [run_single_seed(config, seed, clock=clock) for seed in config.seeds]


# -- reading artifacts back ---------------------------------------------------


def load_checkpoint(agent, path: str | Path) -> None:
    """Restore an agent's weights in place from a run's checkpoint file.

    The agent must be composed with the same configuration that produced the
    checkpoint: the parameter name sets have to match exactly, and every
    array's shape must agree.
    """
    with np.load(path) as arrays:
        saved = {name: arrays[name] for name in arrays.files}
    params = agent.named_params()
    missing = sorted(set(params) - set(saved))
    extra = sorted(set(saved) - set(params))
    if missing or extra:
        raise UsageError(
            "checkpoint does not match the agent's parameters "
            f"(missing: {missing or 'none'}, unexpected: {extra or 'none'})"
        )
    for name, tensor in params.items():
        if saved[name].shape != tensor.data.shape:
            raise UsageError(
                f"checkpoint array {name} has shape {saved[name].shape}, "
                f"agent expects {tensor.data.shape}"
            )
        tensor.data[...] = saved[name]


def read_metrics(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def train_series(rows: list[dict], metric: str) -> np.ndarray:
    """Per-episode series of one curve metric from parsed metrics rows."""
    key = {"reward": "reward", "rate": "mean_rate", "power": "mean_power"}[metric]
    return np.array([row[key] for row in rows if row["kind"] == "train"])


def trailing_moving_average(series: np.ndarray, window: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Mean of the last ``window`` values at each index (shorter at the start)."""
    out = np.empty(len(series), dtype=np.float64)
    for i in range(len(series)):
        out[i] = float(np.mean(series[max(0, i - window + 1) : i + 1]))
    return out


def emit_curves(metrics_path: str | Path, out_dir: str | Path | None = None) -> list[Path]:
    """Write one (episode, raw, smoothed) CSV per curve metric.

    Episodes are numbered from 1. Smoothing is the trailing moving average,
    so the first row's smoothed value equals its raw value. Re-emission is
    byte-identical because everything derives from the metrics file.
    """
    metrics_path = Path(metrics_path)
    rows = read_metrics(metrics_path)
    if not any(row["kind"] == "train" for row in rows):
        raise UsageError(f"{metrics_path} contains no training rows")
    out = Path(out_dir) if out_dir is not None else metrics_path.parent
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for metric in CURVE_METRICS:
        series = train_series(rows, metric)
        smoothed = trailing_moving_average(series)
        lines = ["episode,raw,smoothed"]
        for i, (raw, smooth) in enumerate(zip(series, smoothed)):
            lines.append(f"{i + 1},{raw!r},{smooth!r}")
        path = out / f"{metric}.csv"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
