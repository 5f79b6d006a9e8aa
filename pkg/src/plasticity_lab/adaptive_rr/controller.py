"""Replay-ratio accumulator and the latched adaptive RR controller.

The controller starts at a low replay ratio and, once the critic's fraction
of active units stops moving between two consecutive checkpoints
(``|phi - last_phi| < epsilon``), switches to the high ratio for the rest
of the run. The switch happens at most once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from plasticity_lab.utils.errors import ContractViolation

RRMode = Literal["static", "adaptive"]
Decision = Literal["keep", "switch"]


class RRConfig(BaseModel):
    """Replay-ratio settings (``rr.*`` keys)."""

    mode: RRMode = Field(default="static", description="static: fixed RR; adaptive: low then latched high RR.")
    value: float = Field(default=0.5, gt=0, description="Replay ratio of a static run.")
    low: float = Field(default=0.5, gt=0, description="Adaptive RR before the switch.")
    high: float = Field(default=2.0, gt=0, description="Adaptive RR after the switch.")
    epsilon: float = Field(default=0.001, gt=0, description="Critic FAU plateau threshold.")
    check_interval_episodes: int = Field(default=50, ge=1, description="Episodes between FAU checkpoints.")
    ema: Optional[float] = Field(
        default=None, gt=0, le=1, description="Optional EMA weight applied to critic FAU before comparing."
    )
    min_steps_before_check: Optional[int] = Field(
        default=None, ge=0, description="First step a checkpoint may fire; defaults to seed_frames + one interval."
    )

    @model_validator(mode="after")
    def _ordered(self) -> "RRConfig":
        if self.mode == "adaptive" and self.high < self.low:
            raise ValueError(f"rr.high ({self.high}) must be >= rr.low ({self.low})")
        return self


@dataclass
class RRControllerState:
    mode: RRMode
    rr_low: float
    rr_high: float
    rr_current: float
    check_interval: int
    epsilon: float
    min_steps_before_check: int
    accumulator: float = 0.0
    last_phi: Optional[float] = None
    switched: bool = False
    switch_step: Optional[int] = None
    ema: Optional[float] = None
    smoothed_phi: Optional[float] = None
    total_updates: int = 0


@dataclass(frozen=True)
class RRSummary:
    mode: RRMode
    rr_current: float
    switched: bool
    switch_step: Optional[int]


def init_controller(config: RRConfig, seed_frames: int, episode_len: int) -> RRControllerState:
    """Build a fresh controller; the check cadence is counted in episodes."""

    check_interval = config.check_interval_episodes * episode_len
    min_steps = config.min_steps_before_check
    if min_steps is None:
        min_steps = seed_frames + check_interval
    if config.mode == "static":
        low = high = current = config.value
    else:
        low, high, current = config.low, config.high, config.low
    return RRControllerState(
        mode=config.mode,
        rr_low=low,
        rr_high=high,
        rr_current=current,
        check_interval=check_interval,
        epsilon=config.epsilon,
        min_steps_before_check=min_steps,
        ema=config.ema,
    )


def updates_due(state: RRControllerState) -> int:
    """Gradient updates owed after one environment step.

    ``accumulator += rr_current``; the integer part is paid out and the
    fraction carried, so the total never drifts from the real-valued sum.
    """

    state.accumulator += state.rr_current
    k = math.floor(state.accumulator)
    state.accumulator -= k
    state.total_updates += k
    return k


def is_check_step(state: RRControllerState, step: int) -> bool:
    return step >= state.min_steps_before_check and step % state.check_interval == 0


def observe_fau(state: RRControllerState, step: int, phi_critic: float) -> Decision:
    """Feed the critic FAU of a checkpoint; switch to ``rr_high`` on a plateau."""

    if not (math.isfinite(phi_critic) and 0.0 <= phi_critic <= 1.0):
        raise ContractViolation(f"observe_fau: phi must be in [0, 1], got {phi_critic}")
    if step < state.min_steps_before_check:
        raise ContractViolation(
            f"observe_fau: step {step} precedes the first checkpoint at {state.min_steps_before_check}"
        )

    value = phi_critic
    if state.ema is not None:
        if state.smoothed_phi is None:
            state.smoothed_phi = phi_critic
        else:
            state.smoothed_phi = state.ema * phi_critic + (1.0 - state.ema) * state.smoothed_phi
        value = state.smoothed_phi

    decision: Decision = "keep"
    if (
        state.mode == "adaptive"
        and not state.switched
        and state.last_phi is not None
        and abs(value - state.last_phi) < state.epsilon
    ):
        state.rr_current = state.rr_high
        state.switched = True
        state.switch_step = step
        decision = "switch"
        logging.info(
            "RR switch at step %d: phi %.5f -> %.5f, rr now %s", step, state.last_phi, value, state.rr_high
        )
    state.last_phi = value
    return decision


def describe(state: RRControllerState) -> RRSummary:
    return RRSummary(
        mode=state.mode,
        rr_current=state.rr_current,
        switched=state.switched,
        switch_step=state.switch_step,
    )
