"""Sweeps, verification suites, correlation-length fits and the CLI."""

from .config import ConfigError, SweepConfig, load_config, load_model, model_from_spec, model_to_spec, parse_subsystem
from .fit import XiFitRejected, fit_xi_empirical
from .sweep import CSV_COLUMNS, RunRecord, run_sweep
from .verify import Check, VerifyReport, verify_suite

__all__ = [
    "ConfigError",
    "SweepConfig",
    "load_config",
    "load_model",
    "model_from_spec",
    "model_to_spec",
    "parse_subsystem",
    "XiFitRejected",
    "fit_xi_empirical",
    "CSV_COLUMNS",
    "RunRecord",
    "run_sweep",
    "Check",
    "VerifyReport",
    "verify_suite",
]
