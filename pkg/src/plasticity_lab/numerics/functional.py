"""Differentiable layer functions built on :mod:`plasticity_lab.numerics.tensor`."""

from __future__ import annotations

from typing import Literal, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from plasticity_lab.numerics.tensor import Tensor, as_tensor, make_result
from plasticity_lab.utils.errors import ConfigurationError

Activation = Literal["relu", "crelu", "tanh", "identity"]
RECTIFIERS = frozenset({"relu", "crelu"})

LAYER_NORM_EPS = 1e-5
SPECTRAL_EPS = 1e-12


def linear(x: Tensor, w: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """Affine map ``x @ w.T + b`` for ``x[B,I]``, ``w[O,I]``, ``b[O]``."""

    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[1]:
        raise ConfigurationError(f"linear: cannot apply weight {w.shape} to input {x.shape}")
    if b is not None and b.shape != (w.shape[0],):
        raise ConfigurationError(f"linear: bias {b.shape} does not match weight {w.shape}")

    out = x.data @ w.data.T
    if b is not None:
        out = out + b.data

    def _backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x.accumulate(g @ w.data)
        if w.requires_grad:
            w.accumulate(g.T @ x.data)
        if b is not None and b.requires_grad:
            b.accumulate(g.sum(axis=0))

    parents = (x, w) if b is None else (x, w, b)
    return make_result(out, parents, _backward)


def conv_output_size(size: int, kernel: int, stride: int) -> int:
    return (size - kernel) // stride + 1


def conv2d(x: Tensor, k: Tensor, b: Optional[Tensor] = None, stride: int = 1) -> Tensor:
    """Valid (unpadded) 2-D convolution of ``x[B,C,H,W]`` with ``k[F,C,kh,kw]``."""

    if x.ndim != 4 or k.ndim != 4:
        raise ConfigurationError(f"conv2d: expected 4-D input and kernel, got {x.shape} and {k.shape}")
    batch, channels, height, width = x.shape
    filters, k_channels, kh, kw = k.shape
    if k_channels != channels:
        raise ConfigurationError(f"conv2d: kernel has {k_channels} channels, input has {channels}")
    if kh > height or kw > width:
        raise ConfigurationError(f"conv2d: kernel {kh}x{kw} larger than input {height}x{width}")
    if stride < 1:
        raise ConfigurationError(f"conv2d: stride must be >= 1, got {stride}")

    out_h = conv_output_size(height, kh, stride)
    out_w = conv_output_size(width, kw, stride)
    windows = sliding_window_view(x.data, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    # windows: [B, C, H', W', kh, kw]
    out = np.tensordot(windows, k.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if b is not None:
        out = out + b.data[None, :, None, None]
    out = np.ascontiguousarray(out)

    def _backward(g: np.ndarray) -> None:
        if k.requires_grad:
            k.accumulate(np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3])))
        if b is not None and b.requires_grad:
            b.accumulate(g.sum(axis=(0, 2, 3)))
        if x.requires_grad:
            dx = np.zeros_like(x.data)
            h_stop = stride * (out_h - 1) + 1
            w_stop = stride * (out_w - 1) + 1
            for i in range(kh):
                for j in range(kw):
                    contrib = np.einsum("bfhw,fc->bchw", g, k.data[:, :, i, j])
                    dx[:, :, i : i + h_stop : stride, j : j + w_stop : stride] += contrib
            x.accumulate(dx)

    parents = (x, k) if b is None else (x, k, b)
    return make_result(out, parents, _backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def _backward(g: np.ndarray) -> None:
        x.accumulate(g * mask)

    return make_result(x.data * mask, (x,), _backward)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def _backward(g: np.ndarray) -> None:
        x.accumulate(g * (1.0 - out * out))

    return make_result(out, (x,), _backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate tensors along ``axis``; gradients are split back."""

    out = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def _backward(g: np.ndarray) -> None:
        for t, piece in zip(tensors, np.split(g, bounds, axis=axis)):
            if t.requires_grad:
                t.accumulate(piece)

    return make_result(out, tuple(tensors), _backward)


def crelu(x: Tensor) -> Tensor:
    """Concatenated ReLU ``[relu(x), relu(-x)]`` along the feature axis (axis 1)."""

    return concat([relu(x), relu(-x)], axis=1)


def activate(x: Tensor, kind: Activation) -> Tensor:
    if kind == "relu":
        return relu(x)
    if kind == "crelu":
        return crelu(x)
    if kind == "tanh":
        return tanh(x)
    if kind == "identity":
        return x
    raise ConfigurationError(f"Unknown activation '{kind}'")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Normalize each row of ``x[B,D]`` to zero mean and unit variance, then scale and shift."""

    if x.ndim != 2 or x.shape[1] < 2:
        raise ConfigurationError(f"layer_norm: expected [B, D>=2] input, got {x.shape}")
    if gain.shape != (x.shape[1],) or bias.shape != (x.shape[1],):
        raise ConfigurationError(f"layer_norm: gain/bias must have shape ({x.shape[1]},)")

    width = x.shape[1]
    centered = x.data - x.data.mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=1, keepdims=True) + eps)
    normed = centered * inv_std
    out = normed * gain.data + bias.data

    def _backward(g: np.ndarray) -> None:
        if gain.requires_grad:
            gain.accumulate((g * normed).sum(axis=0))
        if bias.requires_grad:
            bias.accumulate(g.sum(axis=0))
        if x.requires_grad:
            dnormed = g * gain.data
            dx = (
                width * dnormed
                - dnormed.sum(axis=1, keepdims=True)
                - normed * (dnormed * normed).sum(axis=1, keepdims=True)
            ) * (inv_std / width)
            x.accumulate(dx)

    return make_result(out, (x, gain, bias), _backward)


def _unit(vector: np.ndarray, eps: float) -> np.ndarray:
    return vector / max(float(np.linalg.norm(vector)), eps)


def power_iteration(w: np.ndarray, u: np.ndarray, n_iters: int, eps: float = SPECTRAL_EPS) -> Tuple[np.ndarray, np.ndarray, float]:
    """Run ``n_iters`` power iterations; return ``(u, v, sigma)``."""

    if n_iters < 1:
        raise ConfigurationError(f"power iteration needs n_iters >= 1, got {n_iters}")
    v = np.zeros(w.shape[1], dtype=w.dtype)
    for _ in range(n_iters):
        v = _unit(w.T @ u, eps)
        wv = w @ v
        if np.linalg.norm(wv) < eps:
            # degenerate matrix: keep the previous u
            break
        u = _unit(wv, eps)
    sigma = float(u @ w @ v)
    return u, v, sigma


def spectral_normalize(
    w: Tensor, u: np.ndarray, n_iters: int = 1, eps: float = SPECTRAL_EPS
) -> Tuple[Tensor, np.ndarray]:
    """Divide ``w[O,I]`` by its power-iteration spectral norm estimate.

    ``u`` is the persisted left singular vector estimate of length ``O``.
    Gradients flow through ``sigma = u^T W v`` with ``u`` and ``v`` held
    constant. A (near) zero matrix has its ``sigma`` clamped to ``eps``.
    """

    if w.ndim != 2 or u.shape != (w.shape[0],):
        raise ConfigurationError(f"spectral_normalize: vector {u.shape} does not match weight {w.shape}")
    u, v, sigma_value = power_iteration(w.data, u, n_iters, eps)
    if sigma_value < eps:
        return w / as_tensor(eps, w.dtype), u
    sigma = (w * np.outer(u, v).astype(w.dtype)).sum()
    return w / sigma, u


def minimum(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise minimum; ties send the gradient to ``a``."""

    take_a = a.data <= b.data
    out = np.where(take_a, a.data, b.data)

    def _backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(g * take_a)
        if b.requires_grad:
            b.accumulate(g * ~take_a)

    return make_result(out, (a, b), _backward)


def square(x: Tensor) -> Tensor:
    return x * x


def mse_loss(prediction: Tensor, target: Tensor | np.ndarray) -> Tensor:
    """Mean squared error; ``target`` is treated as a constant."""

    target = as_tensor(target, prediction.dtype)
    if target.shape != prediction.shape:
        raise ConfigurationError(f"mse_loss: prediction {prediction.shape} vs target {target.shape}")
    diff = prediction - target.detach()
    return square(diff).mean()
