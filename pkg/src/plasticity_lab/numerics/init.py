"""Parameter initializers."""

from __future__ import annotations

from typing import Literal, Sequence

import numpy as np

from plasticity_lab.utils.errors import ConfigurationError

InitScheme = Literal["orthogonal", "uniform_fanin", "zeros", "ones"]


def _orthogonal(shape: Sequence[int], rng: np.random.Generator, gain: float) -> np.ndarray:
    rows = int(shape[0])
    cols = int(np.prod(shape[1:])) if len(shape) > 1 else 1
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    # sign fix makes the draw uniform over the orthogonal group
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q.reshape(tuple(shape))


def init_layer(
    shape: Sequence[int],
    scheme: InitScheme,
    rng: np.random.Generator,
    *,
    gain: float = 1.0,
    dtype: np.dtype | str = np.float64,
) -> np.ndarray:
    """Draw an initial array for a parameter of ``shape``.

    Weights of linear layers (``[O, I]``) and convolutions (``[F, C, kh, kw]``)
    use ``orthogonal`` (rows of the flattened ``[O, I*...]`` matrix are
    orthonormal) or ``uniform_fanin`` (``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``).
    Biases use ``zeros``; normalization gains use ``ones``.
    """

    shape = tuple(int(s) for s in shape)
    if not shape or any(s <= 0 for s in shape):
        raise ConfigurationError(f"init_layer: invalid shape {shape}")
    if scheme == "orthogonal":
        if len(shape) < 2:
            raise ConfigurationError("init_layer: orthogonal init needs at least 2 dimensions")
        values = _orthogonal(shape, rng, gain)
    elif scheme == "uniform_fanin":
        fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
        bound = gain / np.sqrt(fan_in)
        values = rng.uniform(-bound, bound, size=shape)
    elif scheme == "zeros":
        values = np.zeros(shape)
    elif scheme == "ones":
        values = np.ones(shape)
    else:
        raise ConfigurationError(f"init_layer: unknown scheme '{scheme}'")
    return np.asarray(values, dtype=dtype)
