"""Random-shift image augmentation and its on/off schedule."""

from __future__ import annotations

from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from plasticity_lab.utils.config import split_list
from plasticity_lab.utils.errors import ContractViolation

DAEvent = Literal["da_on", "da_off"]


class Toggle(BaseModel):
    """Switch augmentation on or off from ``step`` onwards."""

    step: int = Field(ge=0, description="Environment step at which the toggle takes effect.")
    on: bool = Field(description="State from this step on.")

    @model_validator(mode="before")
    @classmethod
    def _parse_text(cls, value):
        if isinstance(value, str):
            step, _, state = value.partition(":")
            state = state.strip().lower()
            if state not in {"on", "off"}:
                raise ValueError(f"Toggle must look like 'step:on' or 'step:off', got {value!r}")
            return {"step": int(step.strip()), "on": state == "on"}
        return value

    def to_text(self) -> str:
        return f"{self.step}:{'on' if self.on else 'off'}"


class ShiftAugmentConfig(BaseModel):
    """Data augmentation switch, pad size and toggle schedule."""

    enabled: bool = Field(default=True, description="DA state before the first toggle.")
    pad: Optional[int] = Field(
        default=None, ge=0, description="Shift pad in pixels; defaults to round(frame_size * 4 / 84)."
    )
    schedule: List[Toggle] = Field(default_factory=list, description="Toggles as 'step:on|off' entries.")

    @field_validator("schedule", mode="before")
    @classmethod
    def _split_schedule(cls, value):
        return split_list(value)

    @field_validator("schedule")
    @classmethod
    def _increasing(cls, value: List[Toggle]) -> List[Toggle]:
        steps = [t.step for t in value]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError(f"DA toggle steps must be strictly increasing, got {steps}")
        return value


def default_pad(frame_size: int) -> int:
    """Scale the +-4 pixel shift used at 84 px to ``frame_size``."""

    return int(round(frame_size * 4 / 84))


def resolve_pad(config: ShiftAugmentConfig, frame_size: int) -> int:
    return default_pad(frame_size) if config.pad is None else config.pad


def da_active(config: ShiftAugmentConfig, step: int) -> bool:
    """State set by the last toggle at or before ``step``, else ``config.enabled``."""

    state = config.enabled
    for toggle in config.schedule:
        if toggle.step > step:
            break
        state = toggle.on
    return state


def toggle_events(config: ShiftAugmentConfig, step: int) -> Optional[DAEvent]:
    """The event of a toggle scheduled exactly at ``step``, if any."""

    for toggle in config.schedule:
        if toggle.step == step:
            return "da_on" if toggle.on else "da_off"
    return None


def random_shift(
    batch: np.ndarray,
    pad: int,
    rng: Optional[np.random.Generator] = None,
    *,
    offsets: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Shift each image of ``batch[B,C,H,W]`` by an integer offset.

    Each image is edge-padded by ``pad`` pixels and an ``H x W`` window is
    cropped at an offset drawn uniformly from ``[0, 2*pad]^2`` (or taken from
    ``offsets``, shape ``[B, 2]`` as ``(row, col)``).
    """

    batch = np.asarray(batch)
    if batch.ndim != 4:
        raise ContractViolation(f"random_shift expects [B, C, H, W], got {batch.shape}")
    size_b, channels, height, width = batch.shape
    if pad < 0 or 2 * pad > min(height, width):
        raise ContractViolation(f"pad {pad} must be in [0, min(H, W)/2]")
    if pad == 0:
        return batch.copy()
    if offsets is None:
        if rng is None:
            raise ContractViolation("random_shift needs an rng when offsets are not given")
        offsets = rng.integers(0, 2 * pad + 1, size=(size_b, 2))
    offsets = np.asarray(offsets, dtype=np.int64)
    if offsets.shape != (size_b, 2) or offsets.min() < 0 or offsets.max() > 2 * pad:
        raise ContractViolation(f"offsets must be [B, 2] within [0, {2 * pad}]")

    padded = np.pad(batch, ((0, 0), (0, 0), (pad, pad), (pad, pad)), mode="edge")
    rows = offsets[:, 0, None] + np.arange(height)
    cols = offsets[:, 1, None] + np.arange(width)
    return padded[
        np.arange(size_b)[:, None, None, None],
        np.arange(channels)[None, :, None, None],
        rows[:, None, :, None],
        cols[:, None, None, :],
    ]
