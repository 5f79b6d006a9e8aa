"""Reset, plasticity injection and shrink-and-perturb."""

from __future__ import annotations

import logging
from fnmatch import fnmatch
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, Optional

import numpy as np

from plasticity_lab.numerics import functional as F
from plasticity_lab.numerics.layers import MLP, ActivationProbe, Conv2d, Linear, Module
from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.numerics.tensor import Tensor
from plasticity_lab.plasticity.config import InjectionTarget
from plasticity_lab.utils.errors import ConfigurationError

if TYPE_CHECKING:
    from plasticity_lab.agent.agent import Agent

FreshDraw = Callable[[Parameter, np.random.Generator], np.ndarray]

TRAINABLE_SUFFIX = "inject_train"
FROZEN_SUFFIX = "inject_frozen"


def _matches(name: str, patterns: Iterable[str]) -> bool:
    return any(fnmatch(name, pattern) for pattern in patterns)


def reset_heads(agent: "Agent", targets: Iterable[str], rng: np.random.Generator) -> List[str]:
    """Re-draw actor/critic parameters matching ``targets`` from their initializers.

    Adam moments of the re-drawn parameters are zeroed and the target critic
    receives copies of the new critic values. Encoder, replay and
    environment are not touched. Returns the names that were reset.
    """

    patterns = list(targets)
    reset: Dict[str, List[str]] = {}
    for group in ("actor", "critic"):
        for p in agent.parameter_groups()[group]:
            if p.frozen or not _matches(p.name, patterns):
                continue
            p.assign(p.fresh_draw(rng))
            reset.setdefault(group, []).append(p.name)
    if not reset:
        raise ConfigurationError(f"Reset targets {patterns} match no actor or critic parameter")

    for group, names in reset.items():
        agent.optimizers[group].reset_state(names)
    agent.sync_target(set(reset.get("critic", [])))
    names = [name for group_names in reset.values() for name in group_names]
    logging.info("Reset %d parameters at step %d", len(names), agent.step)
    return names


def _head_prefix(head: MLP) -> str:
    return head.fc1.weight.name[: -len(".fc1.weight")]


def fresh_like(head: MLP, name: str, rng: np.random.Generator) -> MLP:
    """A newly initialized MLP with the architecture of ``head``."""

    in_features, out_features = head.io_shape
    weight = head.fc1.weight
    return MLP(
        name,
        in_features,
        weight.shape[0],
        out_features,
        rng,
        activation=head.activation,
        output_activation=head.output_activation,
        layer_norm=head.norm1 is not None,
        spectral_norm=head.fc1.spectral_u is not None,
        scheme=weight.init_scheme,
        dtype=weight.data.dtype,
    )


class InjectedHead(Module):
    """``h_base(z) + h_trainable(z) - h_frozen(z)`` before the output activation.

    ``trainable`` and ``frozen_copy`` start as copies of one fresh
    initialization, so the head computes the base function at creation.
    Only ``trainable`` learns.
    """

    def __init__(self, base: MLP, trainable: MLP, frozen_copy: MLP):
        base.freeze()
        frozen_copy.freeze()
        self.base = base
        self.trainable = trainable
        self.frozen_copy = frozen_copy
        self.output_activation = base.output_activation

    @classmethod
    def wrap(cls, base: MLP, rng: np.random.Generator) -> "InjectedHead":
        prefix = _head_prefix(base)
        trainable = fresh_like(base, f"{prefix}.{TRAINABLE_SUFFIX}", rng)
        frozen_copy = trainable.clone(f"{prefix}.{TRAINABLE_SUFFIX}.", f"{prefix}.{FROZEN_SUFFIX}.")
        return cls(base, trainable, frozen_copy)

    def twin(self, old_prefix: str, new_prefix: str, base: MLP) -> "InjectedHead":
        """Analogue over another ``base`` (a target network head), fully frozen."""

        trainable = self.trainable.clone(old_prefix, new_prefix)
        frozen_copy = self.frozen_copy.clone(old_prefix, new_prefix)
        head = InjectedHead(base, trainable, frozen_copy)
        head.freeze()
        return head

    @property
    def io_shape(self):
        return self.base.io_shape

    def preactivation(self, x: Tensor, probe: Optional[ActivationProbe] = None, tag: str = "") -> Tensor:
        base = self.base.preactivation(x, probe, tag)
        fresh = self.trainable.preactivation(x, probe, tag)
        return base + fresh - self.frozen_copy.preactivation(x)

    def forward(self, x: Tensor, probe: Optional[ActivationProbe] = None, tag: str = "") -> Tensor:
        return F.activate(self.preactivation(x, probe, tag), self.output_activation)


def _swap_head(agent: "Agent", group: str, head: MLP, rng: np.random.Generator) -> InjectedHead:
    injected = InjectedHead.wrap(head, rng)
    optimizer = agent.optimizers[group]
    optimizer.remove(p.name for p in injected.base.parameters())
    optimizer.add(injected.trainable.parameters())
    return injected


def inject_plasticity(agent: "Agent", module: InjectionTarget, rng: np.random.Generator) -> InjectedHead | List[InjectedHead]:
    """Freeze the head of ``module`` and add a fresh trainable head minus its frozen twin."""

    if module in agent.injected:
        raise ConfigurationError(f"Plasticity was already injected into the {module}")
    if module == "actor":
        if not isinstance(agent.actor.policy, MLP):
            raise ConfigurationError("Actor head is not an MLP")
        result: InjectedHead | List[InjectedHead] = _swap_head(agent, "actor", agent.actor.policy, rng)
        agent.actor.policy = result
    elif module == "critic":
        heads = []
        for attr in ("q1", "q2"):
            online = getattr(agent.critic, attr)
            if not isinstance(online, MLP):
                raise ConfigurationError(f"Critic head {attr} is not an MLP")
            injected = _swap_head(agent, "critic", online, rng)
            setattr(agent.critic, attr, injected)
            target_base = getattr(agent.critic_target, attr)
            setattr(agent.critic_target, attr, injected.twin("critic.", "critic_target.", target_base))
            heads.append(injected)
        result = heads
    else:
        raise ConfigurationError(f"Unknown injection module '{module}'")
    agent.injected.add(module)
    logging.info("Injected plasticity into the %s at step %d", module, agent.step)
    return result


def _weights_and_biases(module: Module) -> List[Parameter]:
    params = []
    for sub in module.modules():
        if isinstance(sub, (Linear, Conv2d)):
            params.extend((sub.weight, sub.bias))
    return params


def _fresh(p: Parameter, rng: np.random.Generator) -> np.ndarray:
    return p.fresh_draw(rng)


def shrink_and_perturb(
    agent: "Agent",
    targets: Iterable[str],
    alpha: float,
    rng: np.random.Generator,
    *,
    draw: FreshDraw = _fresh,
) -> List[str]:
    """``w <- alpha * w + w_fresh`` on matching linear/conv weights and biases."""

    if not 0.0 < alpha <= 1.0:
        raise ConfigurationError(f"shrink_and_perturb alpha must be in (0, 1], got {alpha}")
    patterns = list(targets)
    touched = []
    for module in (agent.encoder, agent.actor, agent.critic):
        for p in _weights_and_biases(module):
            if p.frozen or not _matches(p.name, patterns):
                continue
            p.assign(alpha * p.data + draw(p, rng))
            touched.append(p.name)
    if not touched:
        raise ConfigurationError(f"Shrink-and-perturb targets {patterns} match no parameter")
    logging.info("Shrink-and-perturb (alpha=%s) on %d parameters at step %d", alpha, len(touched), agent.step)
    return touched
