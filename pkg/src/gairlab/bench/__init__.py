"""Experiment execution, persistence, sweeps, and comparison reports."""

from .compare import SweepReport, compare, episodes_to_fraction_of_final
from .config import (
    OUTPUT_ROOT_ENV_VAR,
    ConfigValidationError,
    RunConfig,
    validate_config,
    validate_document,
)
from .run import (
    SeedRunRecord,
    emit_curves,
    load_checkpoint,
    read_metrics,
    run_experiment,
    run_single_seed,
    trailing_moving_average,
    train_series,
)
from .sweep import load_manifest, stack_from_label, sweep

__all__ = [
    "OUTPUT_ROOT_ENV_VAR",
    "ConfigValidationError",
    "RunConfig",
    "SeedRunRecord",
    "SweepReport",
    "compare",
    "emit_curves",
    "episodes_to_fraction_of_final",
    "load_checkpoint",
    "load_manifest",
    "read_metrics",
    "run_experiment",
    "run_single_seed",
    "stack_from_label",
    "sweep",
    "trailing_moving_average",
    "train_series",
    "validate_config",
    "validate_document",
]
