"""Reverse-mode automatic differentiation over numpy arrays.

A :class:`Tensor` wraps an ``ndarray`` and, when it takes part in a
differentiable computation, remembers its parents and a closure that pushes
the output gradient back to them. ``backward()`` walks the graph in reverse
topological order.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

ArrayLike = Union[np.ndarray, float, int]

_GRAD_ENABLED = True


def grad_enabled() -> bool:
    """Return whether new operations record a backward graph."""

    return _GRAD_ENABLED


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording inside the block."""

    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape``, undoing numpy broadcasting."""

    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, size in enumerate(shape) if size == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """Dense n-dimensional array with an optional gradient slot."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        _parents: Tuple["Tensor", ...] = (),
        _backward: Optional[Callable[[np.ndarray], None]] = None,
    ):
        array = np.asarray(data)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.data: np.ndarray = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward

    # ------------------------------------------------------------------ basics
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    # --------------------------------------------------------------- autodiff
    def accumulate(self, grad: np.ndarray) -> None:
        """Add ``grad`` (already shaped like ``self``) into the gradient slot."""

        grad = unbroadcast(np.asarray(grad, dtype=self.data.dtype), self.shape)
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad = self.grad + grad

    def backward(self, grad: Optional[ArrayLike] = None) -> None:
        """Propagate gradients from this tensor to every leaf that needs them."""

        if not self.requires_grad:
            return
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed gradient needs a scalar tensor")
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))

        self.accumulate(np.broadcast_to(np.asarray(grad, dtype=self.data.dtype), self.shape))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            if node._parents:
                # interior node: release the graph and its gradient
                node._backward = None
                node._parents = ()
                if node is not self:
                    node.grad = None

    # -------------------------------------------------------------- operators
    def __add__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other, self.dtype)
        out = self.data + other.data

        def _backward(g: np.ndarray) -> None:
            if self.requires_grad:
                self.accumulate(g)
            if other.requires_grad:
                other.accumulate(g)

        return make_result(out, (self, other), _backward)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        def _backward(g: np.ndarray) -> None:
            self.accumulate(-g)

        return make_result(-self.data, (self,), _backward)

    def __sub__(self, other: "Tensor | ArrayLike") -> "Tensor":
        return self + (-as_tensor(other, self.dtype))

    def __rsub__(self, other: "Tensor | ArrayLike") -> "Tensor":
        return as_tensor(other, self.dtype) + (-self)

    def __mul__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other, self.dtype)
        out = self.data * other.data

        def _backward(g: np.ndarray) -> None:
            if self.requires_grad:
                self.accumulate(g * other.data)
            if other.requires_grad:
                other.accumulate(g * self.data)

        return make_result(out, (self, other), _backward)

    __rmul__ = __mul__

    def __truediv__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other, self.dtype)
        out = self.data / other.data

        def _backward(g: np.ndarray) -> None:
            if self.requires_grad:
                self.accumulate(g / other.data)
            if other.requires_grad:
                other.accumulate(-g * self.data / (other.data * other.data))

        return make_result(out, (self, other), _backward)

    def __pow__(self, exponent: float) -> "Tensor":
        out = self.data**exponent

        def _backward(g: np.ndarray) -> None:
            self.accumulate(g * exponent * self.data ** (exponent - 1))

        return make_result(out, (self,), _backward)

    def __matmul__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other, self.dtype)
        out = self.data @ other.data

        def _backward(g: np.ndarray) -> None:
            if self.requires_grad:
                self.accumulate(g @ np.swapaxes(other.data, -1, -2))
            if other.requires_grad:
                other.accumulate(np.swapaxes(self.data, -1, -2) @ g)

        return make_result(out, (self, other), _backward)

    # -------------------------------------------------------------- reductions
    def sum(self, axis: Optional[int | Tuple[int, ...]] = None, keepdims: bool = False) -> "Tensor":
        out = self.data.sum(axis=axis, keepdims=keepdims)

        def _backward(g: np.ndarray) -> None:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self.accumulate(np.broadcast_to(g, self.shape))

        return make_result(np.asarray(out), (self,), _backward)

    def mean(self, axis: Optional[int | Tuple[int, ...]] = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else np.prod([self.shape[a] for a in np.atleast_1d(axis)])
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / float(count))

    # ----------------------------------------------------------------- shaping
    def reshape(self, *shape: int | Sequence[int]) -> "Tensor":
        if len(shape) == 1 and not isinstance(shape[0], int):
            shape = tuple(shape[0])
        out = self.data.reshape(shape)

        def _backward(g: np.ndarray) -> None:
            self.accumulate(g.reshape(self.shape))

        return make_result(out, (self,), _backward)

    def transpose(self, *axes: int) -> "Tensor":
        order = axes or tuple(reversed(range(self.ndim)))
        inverse = tuple(np.argsort(order))
        out = self.data.transpose(order)

        def _backward(g: np.ndarray) -> None:
            self.accumulate(g.transpose(inverse))

        return make_result(out, (self,), _backward)

    @property
    def T(self) -> "Tensor":
        return self.transpose()


def as_tensor(value: "Tensor | ArrayLike", dtype: Optional[np.dtype] = None) -> Tensor:
    """Wrap constants as non-differentiable tensors; pass tensors through."""

    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype))


def make_result(
    data: np.ndarray,
    parents: Tuple[Tensor, ...],
    backward: Callable[[np.ndarray], None],
) -> Tensor:
    """Build an operation output, recording the graph only when needed."""

    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=parents, _backward=backward)
    return Tensor(data)
