"""Fraction of active units and weight norms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, Literal

import numpy as np

from plasticity_lab.numerics.layers import ActivationProbe
from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.numerics.tensor import no_grad
from plasticity_lab.replay.buffer import Batch
from plasticity_lab.utils.errors import ConfigurationError

if TYPE_CHECKING:
    from plasticity_lab.agent.agent import Agent

ModuleTag = Literal["encoder", "actor", "critic"]
MODULE_TAGS: tuple[ModuleTag, ...] = ("encoder", "actor", "critic")


@dataclass(frozen=True)
class FAUReport:
    step: int
    phi_encoder: float
    phi_actor: float
    phi_critic: float
    weight_norms: Dict[str, float] = field(default_factory=dict)


def probe_agent(agent: "Agent", eval_batch: Batch) -> ActivationProbe:
    """One inference pass over ``eval_batch`` recording every rectified layer.

    The critic is evaluated on the stored actions of the batch.
    """

    probe = ActivationProbe()
    with no_grad():
        features = agent.encoder(eval_batch.obs, probe)
        agent.actor(features, probe)
        agent.critic(features, eval_batch.action, probe)
    return probe


def measure_fau(module_tag: ModuleTag, agent: "Agent", eval_batch: Batch) -> float:
    """Share of positive post-rectifier units of ``module_tag``, averaged over units and batch."""

    if module_tag not in MODULE_TAGS:
        raise ConfigurationError(f"Unknown module '{module_tag}'")
    return probe_agent(agent, eval_batch).fraction(module_tag)


def group_norm(params: Iterable[Parameter]) -> float:
    return float(np.sqrt(sum(float(np.sum(np.square(p.data, dtype=np.float64))) for p in params)))


def snapshot_weight_norms(agent: "Agent") -> Dict[str, float]:
    """L2 norm of each online parameter group plus their aggregate ``total``."""

    norms = {group: group_norm(params) for group, params in agent.parameter_groups().items()}
    norms["total"] = float(np.sqrt(sum(value**2 for value in norms.values())))
    return norms


def fau_report(agent: "Agent", eval_batch: Batch, step: int) -> FAUReport:
    probe = probe_agent(agent, eval_batch)
    return FAUReport(
        step=step,
        phi_encoder=probe.fraction("encoder"),
        phi_actor=probe.fraction("actor"),
        phi_critic=probe.fraction("critic"),
        weight_norms=snapshot_weight_norms(agent),
    )
