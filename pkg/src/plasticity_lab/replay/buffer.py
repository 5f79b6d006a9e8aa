"""Ring-buffer experience replay with n-step return assembly."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from plasticity_lab.utils.errors import ContractViolation, NotReadyError


class ReplayConfig(BaseModel):
    """Replay sizes, desk-scaled from the DrQ-v2 defaults."""

    capacity: int = Field(default=100_000, ge=1, description="Maximum stored transitions.")
    seed_frames: int = Field(default=400, ge=1, description="Transitions collected before any update.")
    exploration_steps: int = Field(
        default=200, ge=0, description="Initial steps acting uniformly at random."
    )


@dataclass(frozen=True)
class Transition:
    """One environment interaction."""

    obs: np.ndarray
    action: np.ndarray
    reward: float
    discount: float
    next_obs: np.ndarray
    last: bool = False


@dataclass(frozen=True)
class Batch:
    obs: np.ndarray
    action: np.ndarray
    n_step_reward: np.ndarray
    discount_n: np.ndarray
    next_obs_n: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return int(self.obs.shape[0])

    def replace(self, **changes: np.ndarray) -> "Batch":
        fields = {name: getattr(self, name) for name in self.__dataclass_fields__}
        fields.update(changes)
        return Batch(**fields)


def to_pixels(obs: np.ndarray) -> np.ndarray:
    """Quantize [0, 1] observations to uint8."""

    return np.round(np.clip(obs, 0.0, 1.0) * 255.0).astype(np.uint8)


def from_pixels(pixels: np.ndarray) -> np.ndarray:
    return pixels.astype(np.float32) / np.float32(255.0)


class ReplayBuffer:
    """Fixed-capacity FIFO store of transitions.

    Observations are kept once per slot. The next observation of a
    transition is read from the following slot, except for the last
    transition of an episode whose next observation is stored on the side.
    """

    def __init__(self, capacity: int, obs_shape: Tuple[int, ...], action_dim: int):
        if capacity < 1:
            raise ContractViolation(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.obs_shape = tuple(obs_shape)
        self.action_dim = action_dim
        self._obs = np.zeros((capacity, *self.obs_shape), dtype=np.uint8)
        self._action = np.zeros((capacity, action_dim), dtype=np.float32)
        self._reward = np.zeros(capacity, dtype=np.float64)
        self._discount = np.ones(capacity, dtype=np.float64)
        self._last = np.zeros(capacity, dtype=bool)
        self._final_next: Dict[int, np.ndarray] = {}
        self._start = 0
        self._size = 0
        self._pushes = 0
        self._window_cache: Optional[Tuple[Tuple[int, int], Tuple[np.ndarray, np.ndarray, np.ndarray]]] = None

    # ------------------------------------------------------------------ writes
    def __len__(self) -> int:
        return self._size

    @property
    def total_pushed(self) -> int:
        return self._pushes

    def push(self, t: Transition) -> None:
        obs = np.asarray(t.obs)
        if obs.shape != self.obs_shape or np.asarray(t.next_obs).shape != self.obs_shape:
            raise ContractViolation(f"Observation shape {obs.shape} does not match buffer {self.obs_shape}")
        action = np.asarray(t.action, dtype=np.float32).reshape(-1)
        if action.shape != (self.action_dim,):
            raise ContractViolation(f"Action shape {action.shape} does not match ({self.action_dim},)")

        if self._size < self.capacity:
            slot = (self._start + self._size) % self.capacity
            self._size += 1
        else:
            slot = self._start
            self._start = (self._start + 1) % self.capacity
            self._final_next.pop(slot, None)

        self._obs[slot] = to_pixels(obs)
        self._action[slot] = action
        self._reward[slot] = float(t.reward)
        self._discount[slot] = float(t.discount)
        self._last[slot] = bool(t.last)
        if t.last:
            self._final_next[slot] = to_pixels(np.asarray(t.next_obs))
        self._pushes += 1
        self._window_cache = None

    # ------------------------------------------------------------------- reads
    def _slots(self, logical: Optional[np.ndarray] = None) -> np.ndarray:
        if logical is None:
            logical = np.arange(self._size)
        return (self._start + logical) % self.capacity

    def transition(self, index: int) -> Transition:
        """Materialize the transition at logical ``index`` (0 = oldest)."""

        if not 0 <= index < self._size:
            raise IndexError(index)
        slot = int(self._slots(np.asarray(index)))
        if self._last[slot]:
            next_obs = self._final_next[slot]
        elif index + 1 < self._size:
            next_obs = self._obs[int(self._slots(np.asarray(index + 1)))]
        else:
            raise NotReadyError(f"Next observation of transition {index} not stored yet")
        return Transition(
            obs=from_pixels(self._obs[slot]),
            action=self._action[slot].copy(),
            reward=float(self._reward[slot]),
            discount=float(self._discount[slot]),
            next_obs=from_pixels(next_obs),
            last=bool(self._last[slot]),
        )

    def windows(self, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(valid_starts, window_len, ends_episode)`` over logical indices.

        ``window_len[k] = min(n, steps to the episode end)``. A start is valid
        when its whole window and the observation after it are stored.
        """

        if n < 1:
            raise ContractViolation(f"n must be >= 1, got {n}")
        key = (n, self._pushes)
        if self._window_cache is not None and self._window_cache[0] == key:
            return self._window_cache[1]
        size = self._size
        idx = np.arange(size)
        lasts = self._last[self._slots(idx)]
        next_last = np.where(lasts, idx, size)
        next_last = np.minimum.accumulate(next_last[::-1])[::-1]
        dist = next_last - idx
        ends_episode = (next_last < size) & (dist + 1 <= n)
        window_len = np.where(ends_episode, dist + 1, n)
        valid = ends_episode | (idx + n <= size - 1)
        result = (idx[valid], window_len, ends_episode)
        self._window_cache = (key, result)
        return result

    def can_sample(self, n: int, min_size: int = 1) -> bool:
        return self._size >= min_size and self.windows(n)[0].size > 0

    def sample_nstep(
        self,
        batch_size: int,
        n: int,
        gamma: float,
        rng: np.random.Generator,
        *,
        min_size: int = 1,
    ) -> Batch:
        """Sample ``batch_size`` n-step windows uniformly over valid starts.

        ``n_step_reward = sum_{j<m} gamma^j r_{t+j}`` and
        ``discount_n = gamma^m * discount_{t+m-1}``, where ``m`` stops at the
        episode end; ``next_obs_n`` is the observation after the window.
        """

        if self._size < min_size:
            raise NotReadyError(f"Replay holds {self._size} transitions, needs {min_size}")
        valid, window_len, ends_episode = self.windows(n)
        if valid.size == 0:
            raise NotReadyError("No complete n-step window stored yet")

        starts = valid[rng.integers(0, valid.size, size=batch_size)]
        m = window_len[starts]
        powers = np.array([gamma**j for j in range(n + 1)], dtype=np.float64)
        rewards = np.zeros(batch_size, dtype=np.float64)
        for j in range(n):
            active = j < m
            slots = self._slots(np.minimum(starts + j, self._size - 1))
            rewards += np.where(active, powers[j] * self._reward[slots], 0.0)

        end_slots = self._slots(starts + m - 1)
        discount_n = powers[m] * self._discount[end_slots]

        next_pixels = np.empty((batch_size, *self.obs_shape), dtype=np.uint8)
        for i, (start, length, closes) in enumerate(zip(starts, m, ends_episode[starts])):
            if closes:
                next_pixels[i] = self._final_next[int(end_slots[i])]
            else:
                next_pixels[i] = self._obs[int(self._slots(np.asarray(start + length)))]

        start_slots = self._slots(starts)
        return Batch(
            obs=from_pixels(self._obs[start_slots]),
            action=self._action[start_slots].copy(),
            n_step_reward=rewards,
            discount_n=discount_n,
            next_obs_n=from_pixels(next_pixels),
            indices=starts,
        )
