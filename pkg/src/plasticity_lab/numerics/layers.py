"""Layer modules composed from :mod:`plasticity_lab.numerics.functional`."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from plasticity_lab.numerics import functional as F
from plasticity_lab.numerics.init import InitScheme
from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.numerics.tensor import Tensor, grad_enabled
from plasticity_lab.utils.errors import ConfigurationError


@dataclass
class ActivationProbe:
    """Counts positive post-rectifier activations per module tag."""

    active: Dict[str, int] = field(default_factory=dict)
    total: Dict[str, int] = field(default_factory=dict)

    def record(self, tag: str, activations: np.ndarray) -> None:
        self.active[tag] = self.active.get(tag, 0) + int(np.count_nonzero(activations > 0))
        self.total[tag] = self.total.get(tag, 0) + int(activations.size)

    def fraction(self, tag: str) -> float:
        total = self.total.get(tag, 0)
        if total == 0:
            raise ConfigurationError(f"No rectified units were recorded for module '{tag}'")
        return self.active[tag] / total


class Module:
    """Base class: parameters are discovered from instance attributes in definition order."""

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):  # pragma: no cover - abstract
        raise NotImplementedError

    def children(self) -> Iterator["Module"]:
        for value in vars(self).values():
            if isinstance(value, Module):
                yield value
            elif isinstance(value, (list, tuple)):
                yield from (item for item in value if isinstance(item, Module))

    def modules(self) -> Iterator["Module"]:
        yield self
        for child in self.children():
            yield from child.modules()

    def own_parameters(self) -> Iterator[Parameter]:
        for value in vars(self).values():
            if isinstance(value, Parameter):
                yield value

    def parameters(self) -> List[Parameter]:
        params = list(self.own_parameters())
        for child in self.children():
            params.extend(child.parameters())
        return params

    def named_parameters(self) -> Dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def freeze(self) -> None:
        for p in self.parameters():
            p.freeze()

    def rename(self, old_prefix: str, new_prefix: str) -> None:
        """Replace the leading ``old_prefix`` of every parameter name."""

        for p in self.parameters():
            if not p.name.startswith(old_prefix):
                raise ConfigurationError(f"Parameter '{p.name}' is not under '{old_prefix}'")
            p.name = new_prefix + p.name[len(old_prefix) :]

    def clone(self, old_prefix: str, new_prefix: str) -> "Module":
        """Deep copy with parameter names moved from ``old_prefix`` to ``new_prefix``."""

        twin = copy.deepcopy(self)
        for original, copied in zip(self.parameters(), twin.parameters()):
            copied.initial_value = original.initial_value
        twin.rename(old_prefix, new_prefix)
        return twin

    def load_from(self, other: "Module") -> None:
        """Copy values from a structurally identical module."""

        mine, theirs = self.parameters(), other.parameters()
        if len(mine) != len(theirs):
            raise ConfigurationError("load_from: modules have different structure")
        for dst, src in zip(mine, theirs):
            if dst.shape != src.shape:
                raise ConfigurationError(f"load_from: {dst.name} {dst.shape} vs {src.name} {src.shape}")
            dst.assign(src.data)


class Linear(Module):
    def __init__(
        self,
        name: str,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        *,
        scheme: InitScheme = "orthogonal",
        spectral_norm: bool = False,
        dtype: np.dtype | str = np.float64,
    ):
        self.weight = Parameter.create(f"{name}.weight", (out_features, in_features), scheme, rng, dtype=dtype)
        self.bias = Parameter.create(f"{name}.bias", (out_features,), "zeros", rng, dtype=dtype)
        self.spectral_u: Optional[np.ndarray] = None
        if spectral_norm:
            u = rng.standard_normal(out_features).astype(dtype)
            self.spectral_u = u / np.linalg.norm(u)

    def effective_weight(self) -> Tensor:
        if self.spectral_u is None:
            return self.weight.value
        w, u = F.spectral_normalize(self.weight.value, self.spectral_u, n_iters=1)
        if grad_enabled():
            self.spectral_u = u
        return w

    def forward(self, x: Tensor) -> Tensor:
        return F.linear(x, self.effective_weight(), self.bias.value)


class Conv2d(Module):
    def __init__(
        self,
        name: str,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        stride: int,
        rng: np.random.Generator,
        *,
        scheme: InitScheme = "orthogonal",
        dtype: np.dtype | str = np.float64,
    ):
        self.stride = stride
        shape = (out_channels, in_channels, kernel_size, kernel_size)
        self.weight = Parameter.create(f"{name}.weight", shape, scheme, rng, dtype=dtype)
        self.bias = Parameter.create(f"{name}.bias", (out_channels,), "zeros", rng, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight.value, self.bias.value, stride=self.stride)


class LayerNorm(Module):
    """Layer normalization over all non-batch axes."""

    def __init__(self, name: str, width: int, rng: np.random.Generator, *, dtype: np.dtype | str = np.float64):
        self.gain = Parameter.create(f"{name}.gain", (width,), "ones", rng, dtype=dtype)
        self.bias = Parameter.create(f"{name}.bias", (width,), "zeros", rng, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        shape = x.shape
        flat = x.reshape(shape[0], -1) if x.ndim != 2 else x
        out = F.layer_norm(flat, self.gain.value, self.bias.value)
        return out.reshape(shape) if x.ndim != 2 else out


class MLP(Module):
    """Two hidden layers and an output layer.

    ``activation`` is applied after each hidden layer (``crelu`` doubles the
    width seen by the next layer). Optional LayerNorm follows each hidden
    linear layer; optional spectral normalization wraps the first layer.
    """

    def __init__(
        self,
        name: str,
        in_features: int,
        hidden_dim: int,
        out_features: int,
        rng: np.random.Generator,
        *,
        activation: F.Activation = "relu",
        output_activation: F.Activation = "identity",
        layer_norm: bool = False,
        spectral_norm: bool = False,
        scheme: InitScheme = "orthogonal",
        dtype: np.dtype | str = np.float64,
    ):
        if activation not in F.RECTIFIERS:
            raise ConfigurationError(f"MLP hidden activation must be a rectifier, got '{activation}'")
        widen = 2 if activation == "crelu" else 1
        self.activation = activation
        self.output_activation = output_activation
        self.fc1 = Linear(f"{name}.fc1", in_features, hidden_dim, rng, scheme=scheme, spectral_norm=spectral_norm, dtype=dtype)
        self.norm1 = LayerNorm(f"{name}.norm1", hidden_dim, rng, dtype=dtype) if layer_norm else None
        self.fc2 = Linear(f"{name}.fc2", hidden_dim * widen, hidden_dim, rng, scheme=scheme, dtype=dtype)
        self.norm2 = LayerNorm(f"{name}.norm2", hidden_dim, rng, dtype=dtype) if layer_norm else None
        self.out = Linear(f"{name}.out", hidden_dim * widen, out_features, rng, scheme=scheme, dtype=dtype)

    def hidden(self, x: Tensor, probe: Optional[ActivationProbe] = None, tag: str = "") -> Tensor:
        for fc, norm in ((self.fc1, self.norm1), (self.fc2, self.norm2)):
            x = fc(x)
            if norm is not None:
                x = norm(x)
            x = F.activate(x, self.activation)
            if probe is not None:
                probe.record(tag, x.data)
        return x

    def preactivation(self, x: Tensor, probe: Optional[ActivationProbe] = None, tag: str = "") -> Tensor:
        return self.out(self.hidden(x, probe, tag))

    def forward(self, x: Tensor, probe: Optional[ActivationProbe] = None, tag: str = "") -> Tensor:
        return F.activate(self.preactivation(x, probe, tag), self.output_activation)

    @property
    def io_shape(self) -> Tuple[int, int]:
        return self.fc1.weight.shape[1], self.out.weight.shape[0]
