"""Deterministic toy pixel environments standing in for the DeepMind Control suite."""

from plasticity_lab.envlab.base import PixelEnv
from plasticity_lab.envlab.pendulum import PendulumPixel
from plasticity_lab.envlab.point_mass import PointMassPixel
from plasticity_lab.envlab.registry import ENVIRONMENTS, make_env, random_policy_returns
from plasticity_lab.envlab.render import render_discs, world_to_pixel
from plasticity_lab.envlab.spec import EnvSpec, Observation, StepResult

__all__ = [
    "ENVIRONMENTS",
    "EnvSpec",
    "Observation",
    "PendulumPixel",
    "PixelEnv",
    "PointMassPixel",
    "StepResult",
    "make_env",
    "random_policy_returns",
    "render_discs",
    "world_to_pixel",
]
