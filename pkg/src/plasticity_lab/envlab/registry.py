"""Environment lookup by name."""

from __future__ import annotations

from typing import Dict, List, Optional, Type

import numpy as np

from plasticity_lab.envlab.base import PixelEnv
from plasticity_lab.envlab.pendulum import PendulumPixel
from plasticity_lab.envlab.point_mass import PointMassPixel
from plasticity_lab.envlab.spec import EnvSpec
from plasticity_lab.utils.errors import ConfigurationError
from plasticity_lab.utils.seeding import rng_stream

ENVIRONMENTS: Dict[str, Type[PixelEnv]] = {
    PointMassPixel.name: PointMassPixel,
    PendulumPixel.name: PendulumPixel,
}


def make_env(spec: EnvSpec, seed: int = 0, *, rng: Optional[np.random.Generator] = None) -> PixelEnv:
    try:
        env_cls = ENVIRONMENTS[spec.name]
    except KeyError as exc:
        raise ConfigurationError(f"Unknown environment '{spec.name}'") from exc
    return env_cls(spec, seed, rng=rng)


def random_policy_returns(spec: EnvSpec, episodes: int, seed: int = 0) -> List[float]:
    """Episode returns of a uniform-random policy; the smoke-test baseline."""

    env = make_env(spec, seed)
    actions = rng_stream(seed, "action_noise")
    returns = []
    for _ in range(episodes):
        env.reset()
        total, done = 0.0, False
        while not done:
            result = env.step(actions.uniform(-1.0, 1.0, size=spec.action_dim))
            total += result.reward
            done = result.done
        returns.append(total)
    return returns
