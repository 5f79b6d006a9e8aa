"""Environment configuration and step records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

EnvName = Literal["point_mass", "pendulum"]

ACTION_DIMS = {"point_mass": 2, "pendulum": 1}


class EnvSpec(BaseModel):
    """Shape and horizon of a toy pixel environment."""

    name: EnvName = Field(default="point_mass", description="Environment registered in envlab.make_env.")
    frame_size: int = Field(default=48, ge=16, description="Square frame side in pixels.")
    frame_stack: int = Field(default=3, ge=1, description="Number of stacked frames per observation.")
    action_dim: Optional[int] = Field(
        default=None, ge=1, description="Action dimension; filled in from the environment name."
    )
    action_repeat: int = Field(default=2, ge=1, description="Physics sub-steps per agent step.")
    episode_len: int = Field(default=200, ge=1, description="Agent steps per episode (fixed horizon).")
    grayscale: bool = Field(default=True, description="Single-channel frames. Colour is not supported.")

    @model_validator(mode="after")
    def _fill_action_dim(self) -> "EnvSpec":
        expected = ACTION_DIMS[self.name]
        if self.action_dim is None:
            self.action_dim = expected
        elif self.action_dim != expected:
            raise ValueError(f"{self.name} has action_dim {expected}, got {self.action_dim}")
        if not self.grayscale:
            raise ValueError("Only grayscale observations are supported")
        return self

    @property
    def channels(self) -> int:
        return self.frame_stack

    @property
    def obs_shape(self) -> tuple[int, int, int]:
        return (self.frame_stack, self.frame_size, self.frame_size)

    @property
    def physics_steps(self) -> int:
        """Physics integrations per episode."""

        return self.episode_len * self.action_repeat


@dataclass(frozen=True)
class Observation:
    """Stacked frames ``[frame_stack, H, W]`` with values in [0, 1]."""

    pixels: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.pixels.shape


@dataclass(frozen=True)
class StepResult:
    obs: Observation
    reward: float
    done: bool
    physics_state: np.ndarray
