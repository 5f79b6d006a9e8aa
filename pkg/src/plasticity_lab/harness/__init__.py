"""Experiment harness: configuration, protocols, runs, metrics and plots."""

from plasticity_lab.harness.acceptance import CheckResult, summarize_acceptance
from plasticity_lab.harness.config import (
    EvalConfig,
    ExperimentConfig,
    FAUConfig,
    ProtocolOptions,
    dump_config,
    load_config,
)
from plasticity_lab.harness.metrics import COLUMNS, MetricsRow, MetricsWriter, read_metrics
from plasticity_lab.harness.plotting import CurveSummary, plot, summarize_runs
from plasticity_lab.harness.protocols import PROTOCOLS, Arm, expand_arms
from plasticity_lab.harness.runner import RunArtifacts, build_agent, evaluate, run_experiment, run_single
from plasticity_lab.harness.seeding import rng_stream

__all__ = [
    "COLUMNS",
    "PROTOCOLS",
    "Arm",
    "CheckResult",
    "CurveSummary",
    "EvalConfig",
    "ExperimentConfig",
    "FAUConfig",
    "MetricsRow",
    "MetricsWriter",
    "ProtocolOptions",
    "RunArtifacts",
    "build_agent",
    "dump_config",
    "evaluate",
    "expand_arms",
    "load_config",
    "plot",
    "read_metrics",
    "rng_stream",
    "run_experiment",
    "run_single",
    "summarize_acceptance",
    "summarize_runs",
]
