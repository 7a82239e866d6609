"""Exact brute-force baselines: tabular value iteration and one-step search."""

from .tabular import (
    OneStepSearchResult,
    TabularMdp,
    ValueTable,
    build_tabular_mdp,
    exhaustive_one_step,
    greedy_rollout,
    value_iteration,
)

__all__ = [
    "OneStepSearchResult",
    "TabularMdp",
    "ValueTable",
    "build_tabular_mdp",
    "exhaustive_one_step",
    "greedy_rollout",
    "value_iteration",
]
