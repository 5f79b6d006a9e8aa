"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, List, Sequence

import numpy as np

from plasticity_lab.numerics.tensor import Tensor


def numerical_gradient(fn: Callable[[Sequence[np.ndarray]], float], arrays: List[np.ndarray], index: int, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of scalar ``fn`` with respect to ``arrays[index]``."""

    target = arrays[index]
    grad = np.zeros_like(target)
    flat, flat_grad = target.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = fn(arrays)
        flat[i] = original - h
        minus = fn(arrays)
        flat[i] = original
        flat_grad[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def check_gradients(
    fn: Callable[..., Tensor],
    arrays: Sequence[np.ndarray],
    *,
    h: float = 1e-4,
    wrt: Sequence[int] | None = None,
) -> float:
    """Compare autodiff and finite-difference gradients of scalar ``fn(*tensors)``.

    Inputs are promoted to float64. Returns the worst relative error across
    the checked inputs.
    """

    arrays = [np.array(a, dtype=np.float64, copy=True) for a in arrays]
    indices = list(range(len(arrays))) if wrt is None else list(wrt)

    tensors = [Tensor(a.copy(), requires_grad=i in indices) for i, a in enumerate(arrays)]
    out = fn(*tensors)
    out.backward()

    def _scalar(current: Sequence[np.ndarray]) -> float:
        return float(fn(*[Tensor(a) for a in current]).data.sum())

    worst = 0.0
    for i in indices:
        analytic = tensors[i].grad if tensors[i].grad is not None else np.zeros_like(arrays[i])
        numeric = numerical_gradient(_scalar, arrays, i, h)
        worst = max(worst, relative_error(analytic, numeric))
    return worst
