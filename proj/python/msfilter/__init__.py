"""Regime-switching state-space filters and smoothers."""

from ._core import (
    Error,
    FilterRun,
    Model,
    exact_filter,
    grand_transition,
    load_model,
    model_from_json,
    rmse,
    run_campaign,
    run_filter,
    simulate,
    smooth,
    stationary_distribution,
)

__all__ = [
    "Error",
    "FilterRun",
    "Model",
    "exact_filter",
    "grand_transition",
    "load_model",
    "model_from_json",
    "rmse",
    "run_campaign",
    "run_filter",
    "simulate",
    "smooth",
    "stationary_distribution",
]
