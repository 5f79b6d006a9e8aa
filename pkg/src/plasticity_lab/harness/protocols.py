"""Protocols expand one experiment config into named arms.

An arm is a set of dotted-key overrides applied to the base config with
:func:`plasticity_lab.utils.config.apply_overrides`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

from plasticity_lab.harness.config import ExperimentConfig
from plasticity_lab.utils.config import apply_overrides
from plasticity_lab.utils.errors import ConfigurationError

DA_ON: Dict[str, Any] = {"da.enabled": True, "da.schedule": []}
DA_OFF: Dict[str, Any] = {"da.enabled": False, "da.schedule": []}
NO_RESET: Dict[str, Any] = {"interventions.reset.count": None, "interventions.reset.interval": None}
NO_INTERVENTIONS: Dict[str, Any] = {
    **NO_RESET,
    "interventions.injection.module": None,
    "interventions.injection.step": None,
    "interventions.shrink_perturb.count": None,
    "interventions.shrink_perturb.interval": None,
    "interventions.l2_init.coef": 0.0,
    "interventions.weight_decay": 0.0,
    "interventions.layer_norm": False,
    "interventions.spectral_norm": False,
    "interventions.crelu_critic": False,
}
WEIGHT_DECAY = 1e-5
L2_INIT_COEF = 1e-2


@dataclass(frozen=True)
class Arm:
    name: str
    overrides: Dict[str, Any] = field(default_factory=dict)
    priming: bool = False

    def apply(self, config: ExperimentConfig) -> ExperimentConfig:
        return apply_overrides(config, self.overrides)


def _reset_on(config: ExperimentConfig) -> Dict[str, Any]:
    if config.interventions.reset.enabled:
        return {}
    return {"interventions.reset.count": config.protocol_options.reset_count}


def _standard(config: ExperimentConfig) -> List[Arm]:
    return [Arm("default")]


def _factorial_da_reset(config: ExperimentConfig) -> List[Arm]:
    reset_on = _reset_on(config)
    return [
        Arm("da_reset", {**DA_ON, **reset_on}),
        Arm("da_noreset", {**DA_ON, **NO_RESET}),
        Arm("noda_reset", {**DA_OFF, **reset_on}),
        Arm("noda_noreset", {**DA_OFF, **NO_RESET}),
    ]


def _da_toggle(config: ExperimentConfig) -> List[Arm]:
    step = config.protocol_options.toggle_step or config.total_steps // 2
    return [
        Arm("always_on", DA_ON),
        Arm("always_off", DA_OFF),
        Arm("on_then_off", {"da.enabled": True, "da.schedule": [f"{step}:off"]}),
        Arm("off_then_on", {"da.enabled": False, "da.schedule": [f"{step}:on"]}),
    ]


def _rr_sweep(config: ExperimentConfig) -> List[Arm]:
    return [
        Arm(f"rr_{value:g}", {"rr.mode": "static", "rr.value": value})
        for value in config.protocol_options.rr_values
    ]


def _adaptive_rr(config: ExperimentConfig) -> List[Arm]:
    return [
        Arm("static_low", {"rr.mode": "static", "rr.value": config.rr.low}),
        Arm("static_high", {"rr.mode": "static", "rr.value": config.rr.high}),
        Arm("adaptive", {"rr.mode": "adaptive"}),
    ]


def _heavy_priming(config: ExperimentConfig) -> List[Arm]:
    return [
        Arm("da_priming", DA_ON, priming=True),
        Arm("da_nopriming", DA_ON),
        Arm("noda_priming", DA_OFF, priming=True),
        Arm("noda_nopriming", DA_OFF),
    ]


def _injection(config: ExperimentConfig) -> List[Arm]:
    options = config.protocol_options
    step = options.injection_step or config.total_steps // 2
    shared: Dict[str, Any] = {}
    if options.da_start_step is not None:
        shared = {"da.enabled": False, "da.schedule": [f"{options.da_start_step}:on"]}
    return [
        Arm("none", {**shared, "interventions.injection.module": None, "interventions.injection.step": None}),
        Arm("actor", {**shared, "interventions.injection.module": "actor", "interventions.injection.step": step}),
        Arm("critic", {**shared, "interventions.injection.module": "critic", "interventions.injection.step": step}),
    ]


def _reset_interval(config: ExperimentConfig) -> List[Arm]:
    return [
        Arm(f"reset_{count}", {"interventions.reset.count": count, "interventions.reset.interval": None})
        for count in config.protocol_options.reset_counts
    ]


def _interventions(config: ExperimentConfig) -> List[Arm]:
    """A no-DA baseline and one arm per intervention on top of it."""

    count = config.protocol_options.reset_count
    single: Dict[str, Dict[str, Any]] = {
        "baseline": {},
        "da": DA_ON,
        "reset": {"interventions.reset.count": count},
        "weight_decay": {"interventions.weight_decay": WEIGHT_DECAY},
        "l2_init": {"interventions.l2_init.coef": L2_INIT_COEF},
        "layer_norm": {"interventions.layer_norm": True},
        "spectral_norm": {"interventions.spectral_norm": True},
        "shrink_perturb": {"interventions.shrink_perturb.count": count},
        "crelu": {"interventions.crelu_critic": True},
    }
    return [Arm(name, {**NO_INTERVENTIONS, **DA_OFF, **extra}) for name, extra in single.items()]


def _frozen_encoder(config: ExperimentConfig) -> List[Arm]:
    return [
        Arm(f"{da}_{state}", {**overrides, "agent.freeze_encoder": state == "frozen"})
        for da, overrides in (("da", DA_ON), ("noda", DA_OFF))
        for state in ("frozen", "trained")
    ]


PROTOCOLS: Dict[str, Callable[[ExperimentConfig], List[Arm]]] = {
    "standard": _standard,
    "factorial_da_reset": _factorial_da_reset,
    "da_toggle": _da_toggle,
    "rr_sweep": _rr_sweep,
    "adaptive_rr": _adaptive_rr,
    "heavy_priming": _heavy_priming,
    "injection": _injection,
    "reset_interval": _reset_interval,
    "interventions": _interventions,
    "frozen_encoder": _frozen_encoder,
}


def expand_arms(config: ExperimentConfig) -> List[Arm]:
    try:
        expand = PROTOCOLS[config.protocol]
    except KeyError as exc:
        raise ConfigurationError(f"Unknown protocol '{config.protocol}'") from exc
    arms = expand(config)
    names = [arm.name for arm in arms]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"Protocol '{config.protocol}' produced duplicate arm names: {names}")
    return arms
