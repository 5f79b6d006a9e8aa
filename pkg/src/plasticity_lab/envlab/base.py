"""Fixed-horizon pixel environment base class."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections import deque
from typing import ClassVar, Deque, List, Optional

import numpy as np

from plasticity_lab.envlab.render import Disc, render_discs
from plasticity_lab.envlab.spec import EnvSpec, Observation, StepResult
from plasticity_lab.utils.errors import ContractViolation
from plasticity_lab.utils.seeding import rng_stream


class PixelEnv(ABC):
    """Continuous-control task observed through stacked rendered frames.

    Subclasses define the physics (`initial_state`, `integrate`, `reward`)
    and what to draw (`discs`). Episodes always last ``spec.episode_len``
    agent steps; there is no early termination.
    """

    name: ClassVar[str]
    action_dim: ClassVar[int]

    def __init__(self, spec: EnvSpec, seed: int = 0, *, rng: Optional[np.random.Generator] = None):
        if spec.name != self.name:
            raise ContractViolation(f"{type(self).__name__} cannot run spec for '{spec.name}'")
        self.spec = spec
        self._rng = rng if rng is not None else rng_stream(seed, "env")
        self._state: Optional[np.ndarray] = None
        self._frames: Deque[np.ndarray] = deque(maxlen=spec.frame_stack)
        self._t = 0

    # ----------------------------------------------------------------- physics
    @abstractmethod
    def initial_state(self, rng: np.random.Generator) -> np.ndarray: ...

    @abstractmethod
    def integrate(self, state: np.ndarray, action: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def reward(self, state: np.ndarray) -> float: ...

    @abstractmethod
    def discs(self, state: np.ndarray) -> List[Disc]: ...

    # --------------------------------------------------------------------- api
    @property
    def physics_state(self) -> np.ndarray:
        """Copy of the hidden state. Test API only; agents never see it."""

        if self._state is None:
            raise ContractViolation("Environment has not been reset")
        return self._state.copy()

    def set_physics_state(self, state: np.ndarray) -> Observation:
        """Place the system in ``state`` and restart the frame stack from it (test API)."""

        self._state = np.array(state, dtype=np.float64, copy=True)
        self._t = 0
        return self._restart_stack()

    @property
    def elapsed_steps(self) -> int:
        return self._t

    def render(self, physics_state: Optional[np.ndarray] = None) -> np.ndarray:
        state = self.physics_state if physics_state is None else physics_state
        return render_discs(self.discs(state), self.spec.frame_size)

    def reset(self, seed: Optional[int] = None) -> Observation:
        if seed is not None:
            self._rng = rng_stream(seed, "env")
        self._state = self.initial_state(self._rng)
        self._t = 0
        return self._restart_stack()

    def step(self, action: np.ndarray) -> StepResult:
        if self._state is None:
            raise ContractViolation("step() called before reset()")
        if self._t >= self.spec.episode_len:
            raise ContractViolation("Episode is over; call reset()")
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.shape != (self.action_dim,):
            raise ContractViolation(f"Expected action of shape ({self.action_dim},), got {action.shape}")
        if not np.all(np.isfinite(action)):
            raise ContractViolation(f"Non-finite action {action}")
        action = np.clip(action, -1.0, 1.0)

        total = 0.0
        for _ in range(self.spec.action_repeat):
            self._state = self.integrate(self._state, action)
            total += self.reward(self._state)
        self._t += 1
        self._frames.append(self.render(self._state)[0])
        return StepResult(
            obs=self._observation(),
            reward=float(np.clip(total / self.spec.action_repeat, 0.0, 1.0)),
            done=self._t >= self.spec.episode_len,
            physics_state=self._state.copy(),
        )

    def _restart_stack(self) -> Observation:
        first = self.render(self._state)[0]
        self._frames.clear()
        for _ in range(self.spec.frame_stack):
            self._frames.append(first)
        return self._observation()

    def _observation(self) -> Observation:
        return Observation(pixels=np.stack(self._frames, axis=0))
