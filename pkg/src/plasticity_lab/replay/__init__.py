"""Experience replay with n-step returns."""

from plasticity_lab.replay.buffer import (
    Batch,
    ReplayBuffer,
    ReplayConfig,
    Transition,
    from_pixels,
    to_pixels,
)
from plasticity_lab.replay.dump import dump_episodes, load_episodes

__all__ = [
    "Batch",
    "ReplayBuffer",
    "ReplayConfig",
    "Transition",
    "dump_episodes",
    "from_pixels",
    "load_episodes",
    "to_pixels",
]
