"""Comparison reports over a sweep manifest.

Produces, without touching any run artifact:

* per-space curve bundles — for each of reward/rate/power one CSV whose
  columns are the per-episode median across seeds, the interquartile range
  across seeds, and the trailing-20-episode moving average of the median,
  side by side for every stack in that space;
* a training-time table (median wall-clock per episode and per run);
* a verdict block evaluating each registered ordering hypothesis that the
  manifest has the runs to answer, as pass/fail with the measured numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, UsageError
from .run import (
    SMOOTHING_WINDOW,
    read_metrics,
    trailing_moving_average,
    train_series,
)
from .sweep import load_manifest

CURVE_METRICS = ("reward", "rate", "power")
NEAR_FRACTION = 0.05  # "within +/-5%" tolerance for the transformer hypothesis
CONVERGENCE_FRACTION = 0.9  # "episodes to reach 90% of own final reward"


@dataclass
class SeedArtifacts:
    seed: int
    rows: list[dict]
    timing: dict
    summary: dict


def _require(path: Path) -> Path:
    if not path.is_file():
        raise UsageError(f"missing run artifact: {path}")
    return path


def _load_group(manifest_dir: Path, entries: list[dict]) -> list[SeedArtifacts]:
    out = []
    for entry in sorted(entries, key=lambda e: e["seed"]):
        rows = read_metrics(_require(manifest_dir / entry["metrics"]))
        timing = json.loads(_require(manifest_dir / entry["timing"]).read_text())
        summary = json.loads(_require(manifest_dir / entry["summary"]).read_text())
        out.append(SeedArtifacts(entry["seed"], rows, timing, summary))
    return out


def episodes_to_fraction_of_final(
    series: np.ndarray, final: float, fraction: float = CONVERGENCE_FRACTION
) -> int:
    """First episode (1-based) whose smoothed reward reaches fraction x final.

    Measured on the trailing moving average so single-episode spikes don't
    count as convergence. Returns the episode count if never reached.
    """
    smoothed = trailing_moving_average(series)
    target = fraction * final
    hits = np.nonzero(smoothed >= target)[0]
    return int(hits[0]) + 1 if hits.size else len(series)


class SweepReport:
    """All loaded artifacts of a sweep, with the measurements verdicts need."""

    def __init__(self, manifest_path: str | Path):
        self.manifest_path = Path(manifest_path)
        self.manifest = load_manifest(self.manifest_path)
        self.manifest_dir = self.manifest_path.parent
        self.groups: dict[tuple[str, str], list[SeedArtifacts]] = {}
        by_key: dict[tuple[str, str], list[dict]] = {}
        for entry in self.manifest["runs"]:
            by_key.setdefault((entry["stack"], entry["space"]), []).append(entry)
        for key, entries in by_key.items():
            self.groups[key] = _load_group(self.manifest_dir, entries)

    # -- measurements ----------------------------------------------------------------

    def has(self, stack: str, space: str) -> bool:
        return (stack, space) in self.groups

    def spaces(self) -> list[str]:
        return sorted({space for _, space in self.groups})

    def stacks_in(self, space: str) -> list[str]:
        return sorted({stack for stack, sp in self.groups if sp == space})

    def _series_matrix(self, stack: str, space: str, metric: str) -> np.ndarray:
        """(seeds, episodes) matrix of one training metric."""
        group = self.groups[(stack, space)]
        series = [train_series(art.rows, metric) for art in group]
        lengths = {len(s) for s in series}
        if len(lengths) != 1:
            raise ConfigurationError(
                f"runs of {stack}/{space} disagree on episode count: {sorted(lengths)}"
            )
        return np.stack(series)

    def final_median(self, stack: str, space: str) -> float:
        """Median across seeds of the per-seed final-window median reward."""
        group = self.groups[(stack, space)]
        return float(np.median([art.summary["final_window_median_reward"] for art in group]))

    def episodes_to_own_final(self, stack: str, space: str) -> float:
        """Median across seeds of the episodes-to-90%-of-own-final measure."""
        group = self.groups[(stack, space)]
        counts = [
            episodes_to_fraction_of_final(
                train_series(art.rows, "reward"),
                art.summary["final_window_median_reward"],
            )
            for art in group
        ]
        return float(np.median(counts))

    def seconds_per_episode(self, stack: str, space: str) -> list[float]:
        """Per-seed mean wall-clock seconds per episode, in seed order."""
        group = self.groups[(stack, space)]
        return [
            art.timing["total_seconds"] / max(1, art.summary["episodes"]) for art in group
        ]

    # -- report emission -------------------------------------------------------------

    def write_curve_bundles(self, out_dir: Path) -> list[Path]:
        written = []
        for space in self.spaces():
            space_dir = out_dir / space
            space_dir.mkdir(parents=True, exist_ok=True)
            stacks = self.stacks_in(space)
            for metric in CURVE_METRICS:
                columns: dict[str, np.ndarray] = {}
                episodes = None
                for stack in stacks:
                    matrix = self._series_matrix(stack, space, metric)
                    episodes = matrix.shape[1]
                    median = np.median(matrix, axis=0)
                    q25, q75 = np.percentile(matrix, [25.0, 75.0], axis=0)
                    columns[f"{stack}:median"] = median
                    columns[f"{stack}:iqr"] = q75 - q25
                    columns[f"{stack}:smoothed"] = trailing_moving_average(
                        median, SMOOTHING_WINDOW
                    )
                header = ["episode"] + list(columns)
                lines = [",".join(header)]
                assert episodes is not None
                for i in range(episodes):
                    cells = [str(i + 1)] + [repr(float(columns[c][i])) for c in columns]
                    lines.append(",".join(cells))
                path = space_dir / f"{metric}.csv"
                path.write_text("\n".join(lines) + "\n")
                written.append(path)
        return written

    def write_training_time_table(self, out_dir: Path) -> Path:
        lines = ["stack,space,median_seconds_per_episode,median_total_seconds"]
        for stack, space in sorted(self.groups):
            group = self.groups[(stack, space)]
            per_episode = [
                art.timing["total_seconds"] / max(1, art.summary["episodes"])
                for art in group
            ]
            totals = [art.timing["total_seconds"] for art in group]
            lines.append(
                f"{stack},{space},{float(np.median(per_episode))!r},{float(np.median(totals))!r}"
            )
        path = out_dir / "training_time.csv"
        path.write_text("\n".join(lines) + "\n")
        return path

    # -- verdicts --------------------------------------------------------------------

    def verdicts(self) -> list[dict]:
        """Evaluate every registered ordering hypothesis the runs can answer."""
        out: list[dict] = []

        def record(name: str, space: str, status: bool | None, detail: dict):
            out.append(
                {
                    "name": name,
                    "space": space,
                    "status": "skipped" if status is None else ("pass" if status else "fail"),
                    "detail": detail,
                }
            )

        for space in self.spaces():
            if self.has("gdm", space) and self.has("vanilla", space):
                g, v = self.final_median("gdm", space), self.final_median("vanilla", space)
                record(
                    "final reward: gdm >= vanilla",
                    space,
                    g >= v,
                    {"gdm": g, "vanilla": v, "strict": g > v},
                )

        if self.has("gan", "discrete") and self.has("vanilla", "discrete"):
            g = self.episodes_to_own_final("gan", "discrete")
            v = self.episodes_to_own_final("vanilla", "discrete")
            record(
                "episodes to 90% of own final: gan <= vanilla",
                "discrete",
                g <= v,
                {"gan": g, "vanilla": v},
            )

        if self.has("gdm+gan", "continuous") and self.has("gdm", "continuous"):
            gg = self.final_median("gdm+gan", "continuous")
            g = self.final_median("gdm", "continuous")
            record(
                "final reward: gdm+gan >= gdm", "continuous", gg >= g, {"gdm+gan": gg, "gdm": g}
            )

        if self.has("gdm+gan+tfd", "continuous") and self.has("gdm+gan", "continuous"):
            t = self.final_median("gdm+gan+tfd", "continuous")
            gg = self.final_median("gdm+gan", "continuous")
            record(
                "final reward: gdm+gan+tfd within 5% of gdm+gan",
                "continuous",
                abs(t - gg) <= NEAR_FRACTION * abs(gg),
                {"gdm+gan+tfd": t, "gdm+gan": gg},
            )

        if self.has("gdm+gan+tfd+vae", "continuous") and self.has("gdm+gan+tfd", "continuous"):
            tv = self.final_median("gdm+gan+tfd+vae", "continuous")
            t = self.final_median("gdm+gan+tfd", "continuous")
            record(
                "final reward: gdm+gan+tfd+vae <= gdm+gan+tfd",
                "continuous",
                tv <= t,
                {"gdm+gan+tfd+vae": tv, "gdm+gan+tfd": t},
            )

        for space in self.spaces():
            chain = [s for s in ("vanilla", "gdm", "gdm+gan") if self.has(s, space)]
            if len(chain) < 2:
                continue
            per_stack = {}
            for stack in chain:
                group = self.groups[(stack, space)]
                per_stack[stack] = {
                    art.seed: art.timing["total_seconds"] / max(1, art.summary["episodes"])
                    for art in group
                }
            seeds = set.intersection(*(set(v) for v in per_stack.values()))
            ordered = all(
                per_stack[a][s] < per_stack[b][s]
                for a, b in zip(chain, chain[1:])
                for s in seeds
            )
            record(
                f"wall-clock per episode increases along {' < '.join(chain)} on every seed",
                space,
                ordered,
                {stack: per_stack[stack] for stack in chain},
            )

        return out


def compare(manifest_path: str | Path, out_dir: str | Path | None = None) -> dict:
    """Emit the full comparison report; returns it as a dictionary.

    Writes only into ``out_dir`` (default: ``compare/`` next to the
    manifest); run artifacts are never modified.
    """
    report = SweepReport(manifest_path)
    out = Path(out_dir) if out_dir is not None else report.manifest_dir / "compare"
    out.mkdir(parents=True, exist_ok=True)
    curve_paths = report.write_curve_bundles(out)
    time_path = report.write_training_time_table(out)
    verdicts = report.verdicts()
    (out / "verdicts.json").write_text(json.dumps(verdicts, sort_keys=True, indent=2) + "\n")
    lines = ["verdicts:"]
    for v in verdicts:
        lines.append(f"  [{v['status'].upper():7s}] {v['name']} ({v['space']})")
        lines.append(f"            {json.dumps(v['detail'], sort_keys=True)}")
    (out / "verdicts.txt").write_text("\n".join(lines) + "\n")
    return {
        "out_dir": str(out),
        "curves": [str(p) for p in curve_paths],
        "training_time": str(time_path),
        "verdicts": verdicts,
    }
