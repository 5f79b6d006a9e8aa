"""When each configured intervention fires, and applying it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Literal, Optional, Set

import numpy as np

from plasticity_lab.plasticity.config import InjectionTarget, InterventionConfig
from plasticity_lab.plasticity.interventions import inject_plasticity, reset_heads, shrink_and_perturb

if TYPE_CHECKING:
    from plasticity_lab.agent.agent import Agent

InterventionEvent = Literal["reset", "shrink_perturb", "injection"]


@dataclass(frozen=True)
class InterventionSchedule:
    reset_steps: Set[int] = field(default_factory=set)
    shrink_perturb_steps: Set[int] = field(default_factory=set)
    injection_step: Optional[int] = None
    injection_module: Optional[InjectionTarget] = None

    @classmethod
    def from_config(cls, config: InterventionConfig, total_steps: int) -> "InterventionSchedule":
        return cls(
            reset_steps=set(config.reset.steps(total_steps)),
            shrink_perturb_steps=set(config.shrink_perturb.steps(total_steps)),
            injection_step=config.injection.step,
            injection_module=config.injection.module,
        )

    def events_at(self, step: int) -> List[InterventionEvent]:
        events: List[InterventionEvent] = []
        if step in self.reset_steps:
            events.append("reset")
        if step in self.shrink_perturb_steps:
            events.append("shrink_perturb")
        if self.injection_step is not None and step == self.injection_step:
            events.append("injection")
        return events


def apply_interventions(
    agent: "Agent",
    events: List[InterventionEvent],
    config: InterventionConfig,
    rng: np.random.Generator,
) -> None:
    for event in events:
        if event == "reset":
            reset_heads(agent, config.reset.targets, rng)
        elif event == "shrink_perturb":
            shrink_and_perturb(agent, config.shrink_perturb.targets, config.shrink_perturb.alpha, rng)
        elif event == "injection":
            assert config.injection.module is not None
            inject_plasticity(agent, config.injection.module, rng)
