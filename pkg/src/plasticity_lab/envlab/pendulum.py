"""Torque-limited pendulum swing-up."""

from __future__ import annotations

from typing import List

import numpy as np

from plasticity_lab.envlab.base import PixelEnv
from plasticity_lab.envlab.render import AGENT_INTENSITY, GOAL_INTENSITY, Disc


class PendulumPixel(PixelEnv):
    """State ``[theta, theta_dot]`` with ``theta = 0`` upright.

    Reward ``(1 + cos theta) / 2``. The bob is drawn bright and the upright
    target position mid-gray.
    """

    name = "pendulum"
    action_dim = 1

    DT = 0.05
    GRAVITY = 10.0
    MASS = 1.0
    LENGTH = 1.0
    MAX_TORQUE = 2.0
    MAX_SPEED = 8.0
    ARM = 0.6
    BOB_RADIUS = 0.14
    GOAL_RADIUS = 0.16

    def initial_state(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([rng.uniform(-np.pi, np.pi), rng.uniform(-1.0, 1.0)])

    def integrate(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        theta, theta_dot = float(state[0]), float(state[1])
        torque = self.MAX_TORQUE * float(action[0])
        accel = 3.0 * self.GRAVITY / (2.0 * self.LENGTH) * np.sin(theta)
        accel += 3.0 / (self.MASS * self.LENGTH**2) * torque
        theta_dot = float(np.clip(theta_dot + accel * self.DT, -self.MAX_SPEED, self.MAX_SPEED))
        theta = theta + theta_dot * self.DT
        theta = (theta + np.pi) % (2.0 * np.pi) - np.pi
        return np.array([theta, theta_dot])

    def reward(self, state: np.ndarray) -> float:
        return float((1.0 + np.cos(state[0])) / 2.0)

    def discs(self, state: np.ndarray) -> List[Disc]:
        theta = float(state[0])
        return [
            (0.0, self.ARM, self.GOAL_RADIUS, GOAL_INTENSITY),
            (self.ARM * np.sin(theta), self.ARM * np.cos(theta), self.BOB_RADIUS, AGENT_INTENSITY),
        ]
