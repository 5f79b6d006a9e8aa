"""Penalty terms added to the critic loss."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from plasticity_lab.numerics.functional import square
from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.numerics.tensor import Tensor


def l2_init_penalty(params: Iterable[Parameter], coef: float) -> Tensor:
    """``coef * sum ||theta - theta_0||^2`` over trainable parameters."""

    total: Tensor | None = None
    for p in params:
        if p.frozen:
            continue
        term = square(p.value - p.initial_value).sum()
        total = term if total is None else total + term
    if total is None:
        return Tensor(np.float64(0.0))
    return total * coef
