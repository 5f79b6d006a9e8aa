"""Named trainable parameters."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from plasticity_lab.numerics.init import InitScheme, init_layer
from plasticity_lab.numerics.tensor import Tensor


class Parameter:
    """A named tensor plus the frozen snapshot it started from.

    ``initial_value`` is captured once at creation and is read-only; the
    L2-Init regularizer pulls ``value`` back towards it.
    """

    __slots__ = ("name", "value", "initial_value", "init_scheme", "gain")

    def __init__(
        self,
        name: str,
        data: np.ndarray,
        init_scheme: InitScheme,
        *,
        gain: float = 1.0,
        trainable: bool = True,
    ):
        self.name = name
        self.init_scheme = init_scheme
        self.gain = gain
        self.value = Tensor(np.array(data, copy=True), requires_grad=trainable)
        snapshot = np.array(data, copy=True)
        snapshot.setflags(write=False)
        self.initial_value = Tensor(snapshot)

    @classmethod
    def create(
        cls,
        name: str,
        shape: Tuple[int, ...],
        scheme: InitScheme,
        rng: np.random.Generator,
        *,
        gain: float = 1.0,
        dtype: np.dtype | str = np.float64,
    ) -> "Parameter":
        return cls(name, init_layer(shape, scheme, rng, gain=gain, dtype=dtype), scheme, gain=gain)

    @property
    def data(self) -> np.ndarray:
        return self.value.data

    @property
    def grad(self) -> np.ndarray | None:
        return self.value.grad

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def frozen(self) -> bool:
        return not self.value.requires_grad

    def freeze(self) -> None:
        self.value.requires_grad = False
        self.value.grad = None

    def zero_grad(self) -> None:
        self.value.grad = None

    def assign(self, array: np.ndarray) -> None:
        """Overwrite the current value in place."""

        np.copyto(self.value.data, np.asarray(array, dtype=self.value.dtype))

    def fresh_draw(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a new array from this parameter's initializer."""

        return init_layer(self.shape, self.init_scheme, rng, gain=self.gain, dtype=self.value.dtype)

    def renamed(self, name: str) -> "Parameter":
        """Copy with a new name; the copy keeps this parameter's initial snapshot."""

        twin = Parameter(name, self.data, self.init_scheme, gain=self.gain, trainable=not self.frozen)
        twin.initial_value = self.initial_value
        return twin

    def __repr__(self) -> str:
        state = ", frozen" if self.frozen else ""
        return f"Parameter({self.name!r}, shape={self.shape}{state})"
