"""Configuration, sweeps, baseline and command-line surface."""

from .baseline import run_gd_baseline
from .config import RunConfig, load_config, sampling_seed
from .runner import (CheckResult, SweepRecord, cmd_bound, cmd_run, cmd_sweep,
                     cmd_verify, sweep, verify_suite)

__all__ = [
    "run_gd_baseline", "RunConfig", "load_config", "sampling_seed",
    "CheckResult", "SweepRecord", "cmd_bound", "cmd_run", "cmd_sweep",
    "cmd_verify", "sweep", "verify_suite",
]
