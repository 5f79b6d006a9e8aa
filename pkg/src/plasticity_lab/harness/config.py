"""Experiment configuration: one pydantic tree over every module's settings."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from plasticity_lab.adaptive_rr.controller import RRConfig
from plasticity_lab.agent.config import AgentConfig
from plasticity_lab.augment.shift import ShiftAugmentConfig
from plasticity_lab.envlab.spec import EnvSpec
from plasticity_lab.plasticity.config import InterventionConfig
from plasticity_lab.replay.buffer import ReplayConfig
from plasticity_lab.utils.config import (
    check_known,
    dump_model,
    get_settings,
    known_keys,
    load_model,
    split_list,
    unflatten,
)

Protocol = Literal[
    "standard",
    "factorial_da_reset",
    "da_toggle",
    "rr_sweep",
    "adaptive_rr",
    "heavy_priming",
    "injection",
    "reset_interval",
    "interventions",
    "frozen_encoder",
]


class ProtocolOptions(BaseModel):
    """Knobs read by the protocol expansions (``protocol_options.*``)."""

    toggle_step: Optional[int] = Field(default=None, ge=1, description="DA toggle step; half the run when unset.")
    rr_values: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], description="Static RRs of rr_sweep.")
    reset_count: int = Field(default=10, ge=1, description="Resets per run in reset arms without explicit reset config.")
    reset_counts: List[int] = Field(default_factory=lambda: [2, 5, 10], description="Reset counts of reset_interval.")
    priming_transitions: int = Field(default=200, ge=1, description="Transitions collected before the priming burst.")
    priming_updates: int = Field(default=10_000, ge=1, description="Updates of the priming burst.")
    injection_step: Optional[int] = Field(default=None, ge=1, description="Injection step; half the run when unset.")
    da_start_step: Optional[int] = Field(default=None, ge=1, description="Enable DA only from this step (injection).")

    @field_validator("rr_values", "reset_counts", mode="before")
    @classmethod
    def _split(cls, value):
        return split_list(value)


class EvalConfig(BaseModel):
    enabled: bool = Field(default=False, description="Run noiseless evaluation episodes.")
    episodes: int = Field(default=10, ge=1, description="Episodes per evaluation.")
    every_episodes: int = Field(default=20, ge=1, description="Training episodes between evaluations.")


class FAUConfig(BaseModel):
    interval: int = Field(default=2000, ge=1, description="Steps between FAU and weight-norm rows.")
    batch_size: int = Field(default=256, ge=1, description="Transitions in the FAU evaluation batch.")


class ExperimentConfig(BaseModel):
    """A full experiment; the flat text format mirrors this tree with dotted keys."""

    protocol: Protocol = Field(default="standard", description="Protocol expanded into arms.")
    total_steps: int = Field(default=50_000, ge=1, description="Agent steps per run.")
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4], description="Root seeds.")
    output_dir: Optional[str] = Field(default=None, description="Output root; PLASTICITY_LAB_OUTPUT_ROOT when unset.")
    env: EnvSpec = Field(default_factory=EnvSpec)
    agent: AgentConfig = Field(default_factory=AgentConfig)
    replay: ReplayConfig = Field(default_factory=ReplayConfig)
    da: ShiftAugmentConfig = Field(default_factory=ShiftAugmentConfig)
    interventions: InterventionConfig = Field(default_factory=InterventionConfig)
    rr: RRConfig = Field(default_factory=RRConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    fau: FAUConfig = Field(default_factory=FAUConfig)
    protocol_options: ProtocolOptions = Field(default_factory=ProtocolOptions)

    @field_validator("seeds", mode="before")
    @classmethod
    def _split_seeds(cls, value):
        return split_list(value)

    @field_validator("seeds")
    @classmethod
    def _non_empty(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("seeds must not be empty")
        if len(set(value)) != len(value):
            raise ValueError(f"seeds must be distinct, got {value}")
        return value

    @model_validator(mode="after")
    def _whole_episodes(self) -> "ExperimentConfig":
        if self.total_steps % self.env.episode_len:
            raise ValueError(
                f"total_steps ({self.total_steps}) must be a multiple of env.episode_len ({self.env.episode_len})"
            )
        return self

    @property
    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir or get_settings().output_root)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], *, ignore_unknown: bool = False) -> "ExperimentConfig":
        """Validate a nested mapping; unknown keys raise unless ``ignore_unknown``."""

        flat = _flatten_mapping(data)
        if ignore_unknown:
            allowed = set(known_keys(cls))
            flat = {key: value for key, value in flat.items() if key in allowed}
        else:
            check_known(cls, flat)
        return cls.model_validate(unflatten(flat))


def _flatten_mapping(data: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, Mapping):
            flat.update(_flatten_mapping(value, f"{prefix}{key}."))
        else:
            flat[f"{prefix}{key}"] = value
    return flat


def load_config(path: str | Path) -> ExperimentConfig:
    return load_model(ExperimentConfig, path)


def dump_config(config: ExperimentConfig) -> str:
    return dump_model(config)
