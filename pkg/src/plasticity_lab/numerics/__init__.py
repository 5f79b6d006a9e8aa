"""Minimal reverse-mode autodiff engine with the layers and optimizers the agent uses."""

from plasticity_lab.numerics.functional import (
    RECTIFIERS,
    activate,
    concat,
    conv2d,
    crelu,
    layer_norm,
    linear,
    minimum,
    mse_loss,
    power_iteration,
    relu,
    spectral_normalize,
    square,
    tanh,
)
from plasticity_lab.numerics.gradcheck import check_gradients, numerical_gradient
from plasticity_lab.numerics.init import InitScheme, init_layer
from plasticity_lab.numerics.layers import MLP, ActivationProbe, Conv2d, LayerNorm, Linear, Module
from plasticity_lab.numerics.optim import Adam, AdamState, adam_step, polyak_update
from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.numerics.tensor import Tensor, grad_enabled, no_grad

forward_linear = linear
forward_conv2d = conv2d

__all__ = [
    "RECTIFIERS",
    "ActivationProbe",
    "Adam",
    "AdamState",
    "Conv2d",
    "InitScheme",
    "LayerNorm",
    "Linear",
    "MLP",
    "Module",
    "Parameter",
    "Tensor",
    "activate",
    "adam_step",
    "check_gradients",
    "concat",
    "conv2d",
    "crelu",
    "forward_conv2d",
    "forward_linear",
    "grad_enabled",
    "init_layer",
    "layer_norm",
    "linear",
    "minimum",
    "mse_loss",
    "no_grad",
    "numerical_gradient",
    "polyak_update",
    "power_iteration",
    "relu",
    "spectral_normalize",
    "square",
    "tanh",
]
