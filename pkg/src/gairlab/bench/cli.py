"""Command-line interface.

Subcommands::

    gairlab validate <config.json>
    gairlab run      <config.json>
    gairlab sweep    <config.json> --stacks vanilla,gdm --spaces continuous,discrete
    gairlab compare  <manifest.json> [--out DIR]
    gairlab curves   <metrics.jsonl> [--out DIR]
    gairlab oracle   <config.json> [--out values.csv] [--seed N]

Relative output directories resolve under $GAIRLAB_OUTPUT_ROOT when it is
set. The exit code is 0 only when the requested work fully succeeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import GairlabError
from ..oracle import build_tabular_mdp, greedy_rollout, value_iteration
from .config import OUTPUT_ROOT_ENV_VAR, validate_config
from .run import emit_curves, run_experiment
from .compare import compare
from .sweep import sweep


def _split_csv(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def cmd_validate(args) -> int:
    config = validate_config(args.config)
    print(f"{args.config}: valid")
    print(json.dumps(config.to_dict(), sort_keys=True, indent=2))
    return 0


def cmd_run(args) -> int:
    config = validate_config(args.config)
    records = run_experiment(config)
    for record in records:
        s = record.summary
        print(
            f"seed {s['seed']}: final-window median reward "
            f"{s['final_window_median_reward']:.4f} after {s['episodes']} episodes "
            f"-> {record.paths.root}"
        )
    print(f"artifacts under {config.resolved_output_dir()}")
    return 0


def cmd_sweep(args) -> int:
    config = validate_config(args.config)
    manifest = sweep(config, _split_csv(args.stacks), _split_csv(args.spaces))
    doc = json.loads(manifest.read_text())
    print(f"{len(doc['runs'])} runs -> {manifest}")
    return 0


def cmd_compare(args) -> int:
    report = compare(args.manifest, args.out)
    for verdict in report["verdicts"]:
        print(f"[{verdict['status'].upper():7s}] {verdict['name']} ({verdict['space']})")
    print(f"report under {report['out_dir']}")
    return 0


def cmd_curves(args) -> int:
    for path in emit_curves(args.metrics, args.out):
        print(path)
    return 0


def cmd_oracle(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    env_doc = doc.get("env", doc)  # accept a bare EnvConfig or a full RunConfig
    from ..env.config import EnvConfig

    env = EnvConfig.from_dict(env_doc)
    mdp = build_tabular_mdp(env)
    table = value_iteration(mdp)
    optimum = table.optimal_return(mdp.start_index)
    rollout = greedy_rollout(mdp, table, seed=args.seed)
    print(f"states: {mdp.n_states}, actions: {mdp.n_actions}, horizon: {mdp.horizon}")
    print(f"optimal return from spawn: {optimum!r}")
    print(f"greedy rollout in the simulator: {rollout!r}")
    if abs(rollout - optimum) > 1e-9:
        print("MISMATCH: rollout does not reproduce the optimal value", file=sys.stderr)
        return 1
    if args.out:
        table.to_csv(args.out)
        print(f"value table -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gairlab",
        description="Train and compare generatively-enhanced TD3 agents on the UAV relay task.",
        epilog=f"Relative output directories resolve under ${OUTPUT_ROOT_ENV_VAR} when set.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config file, reporting every violation")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one experiment over its seed list")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a stacks x spaces x seeds matrix")
    p.add_argument("config")
    p.add_argument("--stacks", required=True, help="comma-separated stack labels, e.g. vanilla,gdm")
    p.add_argument("--spaces", required=True, help="comma-separated action spaces")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="emit curve bundles, timing table, and verdicts")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("curves", help="emit (episode, raw, smoothed) CSVs for one run")
    p.add_argument("metrics")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("oracle", help="solve a tiny discrete instance exactly")
    p.add_argument("config", help="EnvConfig JSON (or a RunConfig with an 'env' section)")
    p.add_argument("--out", default=None, help="write the value table CSV here")
    p.add_argument("--seed", type=int, default=0, help="reset seed for the greedy rollout")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GairlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
