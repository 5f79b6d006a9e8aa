"""Adam with decoupled weight decay, and Polyak target averaging."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List

import numpy as np

from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.utils.errors import ConfigurationError, ContractViolation


@dataclass
class AdamState:
    """First/second moment estimates for one parameter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_parameter(cls, p: Parameter, **hyper: float) -> "AdamState":
        return cls(m=np.zeros_like(p.data), v=np.zeros_like(p.data), **hyper)

    def reset(self) -> None:
        self.m[...] = 0.0
        self.v[...] = 0.0
        self.t = 0


def adam_step(p: Parameter, s: AdamState, weight_decay: float = 0.0) -> None:
    """Apply one bias-corrected Adam update to ``p`` and clear its gradient.

    ``weight_decay`` is decoupled: ``value -= lr * weight_decay * value``.
    """

    grad = p.grad
    if grad is None:
        raise ContractViolation(f"adam_step: parameter '{p.name}' has no gradient")
    if weight_decay < 0:
        raise ContractViolation(f"adam_step: weight_decay must be >= 0, got {weight_decay}")
    s.t += 1
    s.m *= s.beta1
    s.m += (1.0 - s.beta1) * grad
    s.v *= s.beta2
    s.v += (1.0 - s.beta2) * grad * grad
    m_hat = s.m / (1.0 - s.beta1**s.t)
    v_hat = s.v / (1.0 - s.beta2**s.t)
    value = p.data
    if weight_decay:
        value -= (s.lr * weight_decay) * value
    value -= s.lr * m_hat / (np.sqrt(v_hat) + s.eps)
    p.zero_grad()


def polyak_update(target: Parameter, online: Parameter, tau: float) -> None:
    """``target <- tau * online + (1 - tau) * target``, in place."""

    if target.shape != online.shape:
        raise ConfigurationError(
            f"polyak_update: {target.name} {target.shape} vs {online.name} {online.shape}"
        )
    if not 0.0 < tau <= 1.0:
        raise ConfigurationError(f"polyak_update: tau must be in (0, 1], got {tau}")
    if tau == 1.0:
        target.assign(online.data)
        return
    target.data[...] = tau * online.data + (1.0 - tau) * target.data


@dataclass
class Adam:
    """Adam over a named set of parameters.

    Only parameters that hold a gradient are stepped, so parameters absent
    from the loss graph (or frozen) never move.
    """

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    params: Dict[str, Parameter] = field(default_factory=dict)
    states: Dict[str, AdamState] = field(default_factory=dict)

    @classmethod
    def over(cls, params: Iterable[Parameter], **hyper: float) -> "Adam":
        optimizer = cls(**hyper)
        optimizer.add(params)
        return optimizer

    def add(self, params: Iterable[Parameter]) -> None:
        for p in params:
            if p.frozen:
                continue
            if p.name in self.params:
                raise ConfigurationError(f"Parameter '{p.name}' already registered")
            self.params[p.name] = p
            self.states[p.name] = AdamState.for_parameter(
                p, lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps
            )

    def remove(self, names: Iterable[str]) -> None:
        for name in names:
            self.params.pop(name, None)
            self.states.pop(name, None)

    def step(self) -> List[str]:
        """Update every registered parameter that has a gradient; return their names."""

        stepped = []
        for name, p in self.params.items():
            if p.grad is None:
                continue
            adam_step(p, self.states[name], self.weight_decay)
            stepped.append(name)
        return stepped

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def reset_state(self, names: Iterable[str]) -> None:
        for name in names:
            if name in self.states:
                self.states[name].reset()

    def state_dict(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for name, s in self.states.items():
            out[f"{name}/m"] = s.m
            out[f"{name}/v"] = s.v
            out[f"{name}/t"] = np.asarray(s.t, dtype=np.int64)
        return out

    def load_state_dict(self, arrays: Dict[str, np.ndarray]) -> None:
        for name, s in self.states.items():
            try:
                s.m[...] = arrays[f"{name}/m"]
                s.v[...] = arrays[f"{name}/v"]
                s.t = int(arrays[f"{name}/t"])
            except KeyError as exc:
                raise ValueError(f"Optimizer state for '{name}' missing from archive") from exc
