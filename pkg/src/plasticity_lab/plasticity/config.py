"""Intervention settings (``interventions.*`` keys)."""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from plasticity_lab.utils.config import split_list

InjectionTarget = Literal["actor", "critic"]


class _Periodic(BaseModel):
    count: Optional[int] = Field(default=None, ge=1, description="Applications spread evenly over the run.")
    interval: Optional[int] = Field(default=None, ge=1, description="Steps between applications.")

    @model_validator(mode="after")
    def _one_of(self):
        if self.count is not None and self.interval is not None:
            raise ValueError("Set either count or interval, not both")
        return self

    @property
    def enabled(self) -> bool:
        return self.count is not None or self.interval is not None

    def steps(self, total_steps: int) -> List[int]:
        """Application steps strictly inside the run.

        ``interval`` gives ``k * interval``. ``count`` gives exactly ``count``
        evenly spaced steps ``k * total_steps // (count + 1)`` for
        ``k = 1..count``, fewer only when the run is too short to hold them.
        """

        if self.interval is not None:
            return list(range(self.interval, total_steps, self.interval))
        if self.count is None:
            return []
        steps = {k * total_steps // (self.count + 1) for k in range(1, self.count + 1)}
        return sorted(s for s in steps if 0 < s < total_steps)


class ResetConfig(_Periodic):
    targets: List[str] = Field(
        default_factory=lambda: ["actor.*", "critic.*"],
        description="fnmatch patterns over actor/critic parameter names.",
    )

    @field_validator("targets", mode="before")
    @classmethod
    def _split(cls, value):
        return split_list(value)


class ShrinkPerturbConfig(_Periodic):
    alpha: float = Field(default=0.8, gt=0, le=1, description="Shrink factor applied before adding fresh weights.")
    targets: List[str] = Field(default_factory=lambda: ["critic.*"], description="fnmatch patterns.")

    @field_validator("targets", mode="before")
    @classmethod
    def _split(cls, value):
        return split_list(value)


class InjectionConfig(BaseModel):
    module: Optional[InjectionTarget] = Field(default=None, description="Head receiving plasticity injection.")
    step: Optional[int] = Field(default=None, ge=1, description="Step of the injection.")

    @model_validator(mode="after")
    def _paired(self) -> "InjectionConfig":
        if (self.module is None) != (self.step is None):
            raise ValueError("injection.module and injection.step must be set together")
        return self

    @property
    def enabled(self) -> bool:
        return self.module is not None


class L2InitConfig(BaseModel):
    coef: float = Field(default=0.0, ge=0, description="L2-Init coefficient; 1e-2 when enabled.")
    include_encoder: bool = Field(default=False, description="Also pull encoder parameters to their init.")


class InterventionConfig(BaseModel):
    """Plasticity interventions and architecture switches."""

    reset: ResetConfig = Field(default_factory=ResetConfig)
    injection: InjectionConfig = Field(default_factory=InjectionConfig)
    shrink_perturb: ShrinkPerturbConfig = Field(default_factory=ShrinkPerturbConfig)
    l2_init: L2InitConfig = Field(default_factory=L2InitConfig)
    weight_decay: float = Field(default=0.0, ge=0, description="Decoupled weight decay; 1e-5 when enabled.")
    layer_norm: bool = Field(default=False, description="LayerNorm after every hidden conv/linear layer.")
    spectral_norm: bool = Field(default=False, description="Spectral norm on the first linear layer of each head.")
    crelu_critic: bool = Field(default=False, description="CReLU activations in the critic.")
