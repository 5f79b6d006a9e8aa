"""Agent hyperparameters (``agent.*`` keys)."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from plasticity_lab.utils.config import get_settings


def _default_dtype() -> str:
    return get_settings().default_dtype


class AgentConfig(BaseModel):
    """DrQ-v2 defaults, with network widths and the exploration horizon scaled down."""

    lr: float = Field(default=1e-4, gt=0, description="Adam learning rate for every optimizer.")
    batch_size: int = Field(default=256, ge=1, description="Mini-batch size per update.")
    gamma: float = Field(default=0.99, gt=0, le=1, description="Discount factor.")
    nstep: int = Field(default=3, ge=1, description="n-step return horizon.")
    tau: float = Field(default=0.01, gt=0, le=1, description="Polyak rate for the target critic.")
    num_filters: int = Field(default=32, ge=1, description="Channels of each encoder conv layer.")
    features_dim: int = Field(default=50, ge=1, description="Width of the encoder output.")
    hidden_dim: int = Field(default=256, ge=1, description="Width of the actor and critic hidden layers.")
    stddev_start: float = Field(default=1.0, ge=0, description="Exploration stddev at step 0.")
    stddev_end: float = Field(default=0.1, ge=0, description="Exploration stddev from the horizon on.")
    stddev_horizon: int = Field(default=50_000, ge=1, description="Steps of the linear stddev decay.")
    noise_clip: float = Field(default=0.3, gt=0, description="Clip applied to exploration and target noise.")
    target_noise_stddev: Optional[float] = Field(
        default=None, ge=0, description="Target policy noise; defaults to the current exploration stddev."
    )
    freeze_encoder: bool = Field(default=False, description="Keep the encoder at its random initialization.")
    dtype: Literal["float32", "float64"] = Field(
        default_factory=_default_dtype, description="Floating point precision of parameters."
    )
