"""Encoder, actor and twin critic built from numerics layers."""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from plasticity_lab.numerics import functional as F
from plasticity_lab.numerics.layers import MLP, ActivationProbe, Conv2d, LayerNorm, Linear, Module
from plasticity_lab.numerics.tensor import Tensor

ENCODER_STRIDES = (2, 2, 1)
ENCODER_KERNEL = 3


class Encoder(Module):
    """Three 3x3 convolutions, then a Linear-LayerNorm-tanh trunk to ``features_dim``."""

    def __init__(
        self,
        obs_shape: Tuple[int, int, int],
        rng: np.random.Generator,
        *,
        num_filters: int = 32,
        features_dim: int = 50,
        layer_norm: bool = False,
        dtype: np.dtype | str = np.float32,
    ):
        channels, height, width = obs_shape
        self.dtype = np.dtype(dtype)
        self.convs: List[Conv2d] = []
        self.norms: List[LayerNorm] = []
        in_channels = channels
        for i, stride in enumerate(ENCODER_STRIDES, start=1):
            self.convs.append(
                Conv2d(f"encoder.conv{i}", in_channels, num_filters, ENCODER_KERNEL, stride, rng, dtype=dtype)
            )
            height = F.conv_output_size(height, ENCODER_KERNEL, stride)
            width = F.conv_output_size(width, ENCODER_KERNEL, stride)
            if layer_norm:
                self.norms.append(LayerNorm(f"encoder.norm{i}", num_filters * height * width, rng, dtype=dtype))
            in_channels = num_filters
        self.flat_dim = num_filters * height * width
        self.trunk = Linear("encoder.trunk", self.flat_dim, features_dim, rng, dtype=dtype)
        self.trunk_norm = LayerNorm("encoder.trunk_norm", features_dim, rng, dtype=dtype)

    def forward(self, obs: np.ndarray, probe: Optional[ActivationProbe] = None) -> Tensor:
        x = Tensor(np.asarray(obs, dtype=self.dtype) - self.dtype.type(0.5))
        for i, conv in enumerate(self.convs):
            x = conv(x)
            if self.norms:
                x = self.norms[i](x)
            x = F.relu(x)
            if probe is not None:
                probe.record("encoder", x.data)
        x = x.reshape(x.shape[0], self.flat_dim)
        return F.tanh(self.trunk_norm(self.trunk(x)))


class Actor(Module):
    """Deterministic policy head; actions lie in (-1, 1)."""

    def __init__(
        self,
        features_dim: int,
        action_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        *,
        layer_norm: bool = False,
        spectral_norm: bool = False,
        dtype: np.dtype | str = np.float32,
    ):
        self.policy = MLP(
            "actor",
            features_dim,
            hidden_dim,
            action_dim,
            rng,
            output_activation="tanh",
            layer_norm=layer_norm,
            spectral_norm=spectral_norm,
            dtype=dtype,
        )

    def forward(self, features: Tensor, probe: Optional[ActivationProbe] = None) -> Tensor:
        return self.policy(features, probe, "actor")


class Critic(Module):
    """Twin Q heads over ``concat(features, action)``."""

    def __init__(
        self,
        features_dim: int,
        action_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        *,
        prefix: str = "critic",
        crelu: bool = False,
        layer_norm: bool = False,
        spectral_norm: bool = False,
        dtype: np.dtype | str = np.float32,
    ):
        self.prefix = prefix
        activation: F.Activation = "crelu" if crelu else "relu"
        self.q1, self.q2 = (
            MLP(
                f"{prefix}.{head}",
                features_dim + action_dim,
                hidden_dim,
                1,
                rng,
                activation=activation,
                layer_norm=layer_norm,
                spectral_norm=spectral_norm,
                dtype=dtype,
            )
            for head in ("q1", "q2")
        )

    def forward(
        self, features: Tensor, action: Tensor | np.ndarray, probe: Optional[ActivationProbe] = None
    ) -> Tuple[Tensor, Tensor]:
        if not isinstance(action, Tensor):
            action = Tensor(np.asarray(action, dtype=features.dtype))
        x = F.concat([features, action], axis=1)
        batch = x.shape[0]
        q1 = self.q1(x, probe, "critic").reshape(batch)
        q2 = self.q2(x, probe, "critic").reshape(batch)
        return q1, q2
