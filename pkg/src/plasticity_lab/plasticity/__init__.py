"""Plasticity measurement (FAU, weight norms) and interventions."""

from plasticity_lab.plasticity.config import (
    InjectionConfig,
    InterventionConfig,
    L2InitConfig,
    ResetConfig,
    ShrinkPerturbConfig,
)
from plasticity_lab.plasticity.fau import (
    MODULE_TAGS,
    FAUReport,
    fau_report,
    measure_fau,
    probe_agent,
    snapshot_weight_norms,
)
from plasticity_lab.plasticity.interventions import (
    InjectedHead,
    fresh_like,
    inject_plasticity,
    reset_heads,
    shrink_and_perturb,
)
from plasticity_lab.plasticity.regularizers import l2_init_penalty
from plasticity_lab.plasticity.schedule import InterventionSchedule, apply_interventions

__all__ = [
    "MODULE_TAGS",
    "FAUReport",
    "InjectedHead",
    "InjectionConfig",
    "InterventionConfig",
    "InterventionSchedule",
    "L2InitConfig",
    "ResetConfig",
    "ShrinkPerturbConfig",
    "apply_interventions",
    "fau_report",
    "fresh_like",
    "inject_plasticity",
    "l2_init_penalty",
    "measure_fau",
    "probe_agent",
    "reset_heads",
    "shrink_and_perturb",
    "snapshot_weight_norms",
]
