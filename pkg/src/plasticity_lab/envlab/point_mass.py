"""Planar point mass pushed towards a fixed goal."""

from __future__ import annotations

from typing import List

import numpy as np

from plasticity_lab.envlab.base import PixelEnv
from plasticity_lab.envlab.render import AGENT_INTENSITY, GOAL_INTENSITY, Disc


class PointMassPixel(PixelEnv):
    """State ``[x, y, vx, vy]``; actions are forces in [-1, 1]^2.

    Per physics sub-step: ``v <- damping * v + dt * force * a``, then
    ``p <- clip(p + dt * v, -1, 1)`` with velocity zeroed on a clipped axis.
    Reward is ``exp(-4 * |p - goal|^2)``.
    """

    name = "point_mass"
    action_dim = 2

    DT = 0.05
    DAMPING = 0.95
    FORCE = 1.0
    GOAL = np.array([0.5, 0.5])
    AGENT_RADIUS = 0.12
    GOAL_RADIUS = 0.15

    def initial_state(self, rng: np.random.Generator) -> np.ndarray:
        position = rng.uniform(-1.0, 1.0, size=2)
        return np.concatenate([position, np.zeros(2)])

    def integrate(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        position, velocity = state[:2], state[2:]
        velocity = self.DAMPING * velocity + self.DT * self.FORCE * action
        moved = position + self.DT * velocity
        position = np.clip(moved, -1.0, 1.0)
        velocity = np.where(position != moved, 0.0, velocity)
        return np.concatenate([position, velocity])

    def reward(self, state: np.ndarray) -> float:
        dist_sq = float(np.sum((state[:2] - self.GOAL) ** 2))
        return float(np.exp(-4.0 * dist_sq))

    def discs(self, state: np.ndarray) -> List[Disc]:
        return [
            (float(self.GOAL[0]), float(self.GOAL[1]), self.GOAL_RADIUS, GOAL_INTENSITY),
            (float(state[0]), float(state[1]), self.AGENT_RADIUS, AGENT_INTENSITY),
        ]
