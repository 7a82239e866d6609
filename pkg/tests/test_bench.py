"""Tests for config validation, experiment runs, sweeps, curves, and reports."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from gairlab.bench import (
    ConfigValidationError,
    SweepReport,
    compare,
    emit_curves,
    episodes_to_fraction_of_final,
    load_checkpoint,
    run_experiment,
    stack_from_label,
    sweep,
    trailing_moving_average,
    validate_config,
    validate_document,
)
from gairlab.bench.cli import main as cli_main
from gairlab.plugins import compose_agent
from gairlab.env import EnvConfig
from gairlab.errors import ConfigurationError, UsageError
from gairlab.plugins import EnhancementStack
from gairlab.rl import Td3Config


def tiny_doc(tmp_path, **extra) -> dict:
    doc = {
        "env": {
            "antenna_count": 2,
            "area_side": 10.0,
            "max_step_distance": 5.0,
            "episode_steps": 5,
            "action_space": "discrete",
            "power_levels": 2,
            "user_position": [12.0, -3.0],
        },
        "td3": {
            "batch_size": 8,
            "hidden_sizes": [16, 16],
            "buffer_capacity": 500,
            "warmup_steps": 5,
        },
        "episodes": 4,
        "seeds": [0, 1],
        "output_dir": str(tmp_path / "runs"),
        "eval_every": 2,
        "eval_episodes": 1,
    }
    doc.update(extra)
    return doc


def write_config(tmp_path, doc) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


# -- validation ---------------------------------------------------------------


def test_empty_object_is_fully_defaulted():
    config = validate_document({})
    assert config.env == EnvConfig()
    assert config.td3 == Td3Config()
    assert config.stack == EnhancementStack()
    assert config.episodes == 100
    assert config.seeds == (0,)
    assert config.eval_every == 10
    assert config.eval_episodes == 5


def test_gdm_plus_transformer_actor_is_a_named_violation():
    with pytest.raises(ConfigValidationError) as exc:
        validate_document({"stack": {"gdm_policy": True, "transformer_actor": True}})
    assert any("stack" in v and "transformer" in v for v in exc.value.violations)


def test_vae_hybrid_action_needs_the_hybrid_space():
    with pytest.raises(ConfigValidationError) as exc:
        validate_document(
            {
                "env": {"action_space": "continuous"},
                "stack": {"vae_hybrid_action": True},
            }
        )
    assert any("vae_hybrid_action" in v and "hybrid" in v for v in exc.value.violations)


def test_all_violations_reported_not_just_the_first():
    doc = {
        "env": {"power_levels": 0},
        "stack": {"gdm_policy": True, "transformer_actor": True},
        "episodes": 0,
        "bogus": 1,
    }
    with pytest.raises(ConfigValidationError) as exc:
        validate_document(doc)
    joined = "\n".join(exc.value.violations)
    assert len(exc.value.violations) >= 4
    assert "env:" in joined
    assert "stack:" in joined
    assert "episodes" in joined
    assert "bogus" in joined


def test_validate_config_handles_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigValidationError, match="file not found"):
        validate_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigValidationError, match="invalid JSON"):
        validate_config(bad)


def test_empty_seed_list_rejected():
    with pytest.raises(ConfigValidationError, match="seeds"):
        validate_document({"seeds": []})


def test_output_root_env_var_rebases_relative_dirs(monkeypatch, tmp_path):
    monkeypatch.setenv("GAIRLAB_OUTPUT_ROOT", str(tmp_path / "root"))
    config = validate_document({"output_dir": "exp1"})
    assert config.resolved_output_dir() == tmp_path / "root" / "exp1"
    absolute = validate_document({"output_dir": str(tmp_path / "abs")})
    assert absolute.resolved_output_dir() == tmp_path / "abs"


# -- running ------------------------------------------------------------------


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("tiny-run")
    config = validate_document(tiny_doc(tmp_path))
    records = run_experiment(config)
    return config, records


def test_two_seeds_two_artifact_sets(tiny_run):
    config, records = tiny_run
    assert len(records) == 2
    for record in records:
        assert record.paths.metrics.is_file()
        assert record.paths.summary.is_file()
        assert record.paths.timing.is_file()
        assert record.paths.checkpoint.is_file()
    assert (config.resolved_output_dir() / "config.json").is_file()


def test_env_step_accounting(tiny_run):
    _, records = tiny_run
    summary = json.loads(records[0].paths.summary.read_text())
    assert summary["env_steps"] == 4 * 5  # episodes x steps per episode
    rows = [json.loads(line) for line in records[0].paths.metrics.read_text().splitlines()]
    train = [r for r in rows if r["kind"] == "train"]
    assert [r["episode"] for r in train] == [0, 1, 2, 3]
    assert train[-1]["env_steps"] == 20
    evals = [r for r in rows if r["kind"] == "eval"]
    assert [r["episode"] for r in evals] == [1, 3]  # cadence of 2 over 4 episodes


def test_timing_sidecar_is_nondecreasing(tiny_run):
    _, records = tiny_run
    timing = json.loads(records[0].paths.timing.read_text())
    elapsed = timing["elapsed"]
    assert len(elapsed) == 4
    assert all(b >= a for a, b in zip(elapsed, elapsed[1:]))
    assert timing["total_seconds"] >= elapsed[-1] - 1e-9


def test_rerun_is_byte_identical_except_timing(tmp_path):
    doc = tiny_doc(tmp_path, seeds=[7], episodes=3)
    config = validate_document(doc)
    first = run_experiment(config)[0]
    metrics1 = first.paths.metrics.read_bytes()
    summary1 = first.paths.summary.read_bytes()
    checkpoint1 = first.paths.checkpoint.read_bytes()
    second = run_experiment(config)[0]
    assert second.paths.metrics.read_bytes() == metrics1
    assert second.paths.summary.read_bytes() == summary1
    assert second.paths.checkpoint.read_bytes() == checkpoint1


def test_load_checkpoint_restores_trained_weights(tiny_run):
    config, records = tiny_run
    record = records[0]
    agent = compose_agent(
        config.env, config.stack, config.td3, record.seed,
        total_steps=config.total_env_steps,
    )
    saved = np.load(record.paths.checkpoint)
    fresh = {k: v.data.copy() for k, v in agent.named_params().items()}
    assert any(not np.array_equal(fresh[k], saved[k]) for k in fresh)
    load_checkpoint(agent, record.paths.checkpoint)
    for name, tensor in agent.named_params().items():
        np.testing.assert_array_equal(tensor.data, saved[name])


def test_load_checkpoint_rejects_mismatched_architecture(tiny_run):
    config, records = tiny_run
    other_td3 = Td3Config(**{**config.td3.to_dict(), "hidden_sizes": (8, 8)})
    agent = compose_agent(config.env, config.stack, other_td3, 0)
    with pytest.raises(UsageError, match="checkpoint"):
        load_checkpoint(agent, records[0].paths.checkpoint)


# -- curves -------------------------------------------------------------------


def test_trailing_moving_average_of_constant_is_constant():
    series = np.full(50, 3.25)
    np.testing.assert_array_equal(trailing_moving_average(series), series)


def test_emit_curves_layout_and_idempotence(tiny_run, tmp_path):
    _, records = tiny_run
    out = tmp_path / "curves"
    paths = emit_curves(records[0].paths.metrics, out)
    assert sorted(p.name for p in paths) == ["power.csv", "rate.csv", "reward.csv"]
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "episode,raw,smoothed"
    assert len(lines) == 1 + 4  # header + one row per episode
    first = lines[1].split(",")
    assert first[0] == "1"
    assert first[1] == first[2]  # trailing window of size 1
    before = [p.read_bytes() for p in paths]
    after = [p.read_bytes() for p in emit_curves(records[0].paths.metrics, out)]
    assert before == after


def test_episodes_to_fraction_of_final():
    rising = np.linspace(0.0, 10.0, 100)
    assert episodes_to_fraction_of_final(rising, 10.0) > 90
    assert episodes_to_fraction_of_final(np.full(30, 5.0), 5.0) == 1
    assert episodes_to_fraction_of_final(np.zeros(30), 5.0) == 30  # never reached


# -- sweeps and comparison ----------------------------------------------------


def test_stack_from_label_round_trip():
    base = EnhancementStack(gdm_steps=3)
    assert stack_from_label("vanilla", base).active_flags() == ()
    parsed = stack_from_label("gdm+gan", base)
    assert parsed.active_flags() == ("gdm_policy", "gan_critic")
    assert parsed.gdm_steps == 3  # knobs inherited from the base stack
    assert parsed.label() == "gdm+gan"
    with pytest.raises(ConfigurationError, match="unknown stack code"):
        stack_from_label("gdm+warp", base)


@pytest.fixture(scope="module")
def tiny_sweep(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("tiny-sweep")
    doc = tiny_doc(tmp_path, seeds=[0, 1], episodes=3, eval_every=0)
    config = validate_document(doc)
    manifest = sweep(config, ["vanilla", "gdm"], ["discrete", "continuous"])
    return config, manifest


def test_sweep_counts_and_paths(tiny_sweep):
    _, manifest_path = tiny_sweep
    manifest = json.loads(manifest_path.read_text())
    assert len(manifest["runs"]) == 2 * 2 * 2  # stacks x spaces x seeds
    assert manifest["stacks"] == ["vanilla", "gdm"]
    for entry in manifest["runs"]:
        for key in ("config", "metrics", "timing", "summary", "checkpoint"):
            assert (manifest_path.parent / entry[key]).is_file()


def test_compare_emits_bundles_timing_and_verdicts(tiny_sweep, tmp_path):
    _, manifest_path = tiny_sweep
    out = tmp_path / "report"
    report = compare(manifest_path, out)
    for space in ("discrete", "continuous"):
        for metric in ("reward", "rate", "power"):
            path = out / space / f"{metric}.csv"
            assert path.is_file()
            header = path.read_text().splitlines()[0].split(",")
            assert header[0] == "episode"
            assert "vanilla:median" in header and "gdm:iqr" in header
    table = (out / "training_time.csv").read_text().splitlines()
    assert table[0] == "stack,space,median_seconds_per_episode,median_total_seconds"
    assert len(table) == 1 + 4  # one row per (stack, space)
    names = [v["name"] for v in report["verdicts"]]
    assert sum("gdm >= vanilla" in n for n in names) == 2  # one per space
    assert (out / "verdicts.json").is_file() and (out / "verdicts.txt").is_file()


def test_compare_is_read_only_over_run_artifacts(tiny_sweep, tmp_path):
    _, manifest_path = tiny_sweep
    files = sorted(p for p in manifest_path.parent.rglob("*") if p.is_file())
    before = {p: p.read_bytes() for p in files if "compare" not in p.parts}
    compare(manifest_path, tmp_path / "elsewhere")
    for path, blob in before.items():
        assert path.read_bytes() == blob


def test_self_compare_has_zero_iqr(tmp_path):
    doc = tiny_doc(tmp_path, seeds=[3], episodes=3, eval_every=0)
    config = validate_document(doc)
    manifest = sweep(config, ["vanilla"], ["discrete"])
    report = SweepReport(manifest)
    matrix = report._series_matrix("vanilla", "discrete", "reward")
    assert matrix.shape == (1, 3)
    q25, q75 = np.percentile(matrix, [25.0, 75.0], axis=0)
    np.testing.assert_array_equal(q75 - q25, np.zeros(3))
    out = tmp_path / "cmp"
    compare(manifest, out)
    rows = (out / "discrete" / "reward.csv").read_text().splitlines()[1:]
    iqr_col = rows[0].split(",")[2]
    assert float(iqr_col) == 0.0


def test_compare_missing_artifact_raises(tiny_sweep, tmp_path):
    _, manifest_path = tiny_sweep
    doc = json.loads(manifest_path.read_text())
    doc["runs"][0]["metrics"] = "missing/metrics.jsonl"
    broken = tmp_path / "broken-manifest.json"
    broken.write_text(json.dumps(doc))
    # paths resolve relative to the manifest location
    with pytest.raises(UsageError, match="missing run artifact"):
        compare(broken, tmp_path / "out")


# -- CLI ----------------------------------------------------------------------


def test_cli_validate_ok_and_failing(tmp_path, capsys):
    path = write_config(tmp_path, tiny_doc(tmp_path))
    assert cli_main(["validate", path]) == 0
    assert "valid" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"episodes": 0}))
    assert cli_main(["validate", str(bad)]) == 1
    assert "violation" in capsys.readouterr().err


def test_cli_run_and_curves(tmp_path, capsys):
    doc = tiny_doc(tmp_path, seeds=[0], episodes=3, eval_every=0)
    path = write_config(tmp_path, doc)
    assert cli_main(["run", path]) == 0
    out = capsys.readouterr().out
    assert "seed 0" in out
    metrics = tmp_path / "runs" / "seed-0" / "metrics.jsonl"
    assert metrics.is_file()
    assert cli_main(["curves", str(metrics), "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "reward.csv").is_file()


def test_cli_sweep_and_compare(tmp_path, capsys):
    doc = tiny_doc(tmp_path, seeds=[0], episodes=3, eval_every=0)
    path = write_config(tmp_path, doc)
    assert cli_main(["sweep", path, "--stacks", "vanilla", "--spaces", "discrete"]) == 0
    manifest = tmp_path / "runs" / "manifest.json"
    assert manifest.is_file()
    assert cli_main(["compare", str(manifest), "--out", str(tmp_path / "report")]) == 0
    assert (tmp_path / "report" / "training_time.csv").is_file()


def test_cli_oracle(tmp_path, capsys):
    env_doc = {
        "antenna_count": 2,
        "area_side": 10.0,
        "max_step_distance": 5.0,
        "episode_steps": 5,
        "action_space": "discrete",
        "power_levels": 2,
        "user_position": [12.0, -3.0],
    }
    path = tmp_path / "env.json"
    path.write_text(json.dumps(env_doc))
    csv_out = tmp_path / "values.csv"
    assert cli_main(["oracle", str(path), "--out", str(csv_out)]) == 0
    out = capsys.readouterr().out
    assert "optimal return" in out
    assert csv_out.is_file()


def test_console_script_is_wired():
    proc = subprocess.run(
        [sys.executable, "-m", "gairlab.bench.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "sweep" in proc.stdout
