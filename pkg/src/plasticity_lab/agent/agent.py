"""DrQ-v2 style actor-critic over pixel observations.

The encoder is trained by the critic loss only: the actor update reads
detached features. The target critic moves by Polyak averaging and never
by gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Set, Tuple

import numpy as np

from plasticity_lab.agent.config import AgentConfig
from plasticity_lab.agent.networks import Actor, Critic, Encoder
from plasticity_lab.augment.shift import random_shift
from plasticity_lab.numerics import functional as F
from plasticity_lab.numerics.layers import ActivationProbe, Linear, Module
from plasticity_lab.numerics.optim import Adam, polyak_update
from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.numerics.tensor import Tensor, no_grad
from plasticity_lab.plasticity.regularizers import l2_init_penalty
from plasticity_lab.replay.buffer import Batch
from plasticity_lab.utils.errors import ConfigurationError, ContractViolation, NonFiniteLossError

ActMode = Literal["explore", "eval"]
GROUPS = ("encoder", "actor", "critic")
TARGET_PREFIX = "critic_target"


@dataclass(frozen=True)
class CriticUpdate:
    loss: float
    l2_penalty: float
    features: Tensor


@dataclass(frozen=True)
class UpdateInfo:
    critic_loss: float
    actor_loss: float


class Agent:
    """Encoder, actor, twin critic, target critic and one Adam per group."""

    def __init__(
        self,
        encoder: Encoder,
        actor: Actor,
        critic: Critic,
        config: AgentConfig,
        *,
        weight_decay: float = 0.0,
        l2_init_coef: float = 0.0,
        l2_init_include_encoder: bool = False,
    ):
        self.config = config
        self.encoder = encoder
        self.actor = actor
        self.critic = critic
        self.critic_target = critic.clone(f"{critic.prefix}.", f"{TARGET_PREFIX}.")
        self.critic_target.prefix = TARGET_PREFIX
        self.critic_target.freeze()
        if config.freeze_encoder:
            encoder.freeze()
        self.weight_decay = weight_decay
        self.l2_init_coef = l2_init_coef
        self.l2_init_include_encoder = l2_init_include_encoder
        self.optimizers: Dict[str, Adam] = {
            group: Adam.over(module.parameters(), lr=config.lr, weight_decay=weight_decay)
            for group, module in (("encoder", encoder), ("actor", actor), ("critic", critic))
        }
        self.step = 0
        self.injected: Set[str] = set()

    @classmethod
    def create(
        cls,
        obs_shape: Tuple[int, int, int],
        action_dim: int,
        config: AgentConfig,
        rng: np.random.Generator,
        *,
        layer_norm: bool = False,
        spectral_norm: bool = False,
        crelu_critic: bool = False,
        weight_decay: float = 0.0,
        l2_init_coef: float = 0.0,
        l2_init_include_encoder: bool = False,
    ) -> "Agent":
        dtype = np.dtype(config.dtype)
        encoder = Encoder(
            obs_shape,
            rng,
            num_filters=config.num_filters,
            features_dim=config.features_dim,
            layer_norm=layer_norm,
            dtype=dtype,
        )
        actor = Actor(
            config.features_dim,
            action_dim,
            config.hidden_dim,
            rng,
            layer_norm=layer_norm,
            spectral_norm=spectral_norm,
            dtype=dtype,
        )
        critic = Critic(
            config.features_dim,
            action_dim,
            config.hidden_dim,
            rng,
            crelu=crelu_critic,
            layer_norm=layer_norm,
            spectral_norm=spectral_norm,
            dtype=dtype,
        )
        return cls(
            encoder,
            actor,
            critic,
            config,
            weight_decay=weight_decay,
            l2_init_coef=l2_init_coef,
            l2_init_include_encoder=l2_init_include_encoder,
        )

    # ------------------------------------------------------------ parameters
    def modules(self) -> Dict[str, Module]:
        return {
            "encoder": self.encoder,
            "actor": self.actor,
            "critic": self.critic,
            TARGET_PREFIX: self.critic_target,
        }

    def parameter_groups(self) -> Dict[str, List[Parameter]]:
        """Online parameters per group; the target critic is not a group."""

        return {
            "encoder": self.encoder.parameters(),
            "actor": self.actor.parameters(),
            "critic": self.critic.parameters(),
        }

    def named_parameters(self) -> Dict[str, Parameter]:
        named: Dict[str, Parameter] = {}
        for module in (self.encoder, self.actor, self.critic, self.critic_target):
            named.update(module.named_parameters())
        return named

    def group_of(self, name: str) -> str:
        group = name.split(".", 1)[0]
        if group not in self.optimizers and group != TARGET_PREFIX:
            raise ConfigurationError(f"Parameter '{name}' belongs to no known group")
        return group

    def online_name(self, target_name: str) -> str:
        return "critic" + target_name[len(TARGET_PREFIX) :]

    def target_pairs(self) -> List[Tuple[Parameter, Parameter]]:
        """``(target, online)`` pairs matched by name."""

        online = self.critic.named_parameters()
        pairs = []
        for name, target in self.critic_target.named_parameters().items():
            source = online.get(self.online_name(name))
            if source is None:
                raise ConfigurationError(f"Target parameter '{name}' has no online counterpart")
            pairs.append((target, source))
        return pairs

    def spectral_pairs(self) -> List[Tuple[Linear, Linear]]:
        """``(target, online)`` spectrally normed layers, matched by weight name.

        Target forwards run without gradients and never advance their own
        power iteration, so the target layers take the online vector.
        """

        online = {
            layer.weight.name: layer
            for layer in self.critic.modules()
            if isinstance(layer, Linear) and layer.spectral_u is not None
        }
        pairs = []
        for layer in self.critic_target.modules():
            if not isinstance(layer, Linear) or layer.spectral_u is None:
                continue
            source = online.get(self.online_name(layer.weight.name))
            if source is None:
                raise ConfigurationError(f"Target layer '{layer.weight.name}' has no online counterpart")
            pairs.append((layer, source))
        return pairs

    def _copy_spectral(self, names: Optional[Set[str]] = None) -> None:
        for target, online in self.spectral_pairs():
            if names is None or online.weight.name in names:
                assert online.spectral_u is not None
                target.spectral_u = online.spectral_u.copy()

    def update_target(self, tau: Optional[float] = None) -> None:
        rate = self.config.tau if tau is None else tau
        for target, online in self.target_pairs():
            polyak_update(target, online, rate)
        self._copy_spectral()

    def sync_target(self, names: Optional[Set[str]] = None) -> None:
        """Copy online critic values into the target critic, optionally only ``names``."""

        for target, online in self.target_pairs():
            if names is None or online.name in names:
                target.assign(online.data)
        self._copy_spectral(names)

    # ---------------------------------------------------------------- acting
    def stddev(self, step: Optional[int] = None) -> float:
        """Linear exploration schedule from ``stddev_start`` to ``stddev_end``."""

        cfg = self.config
        current = self.step if step is None else step
        frac = min(max(current, 0) / cfg.stddev_horizon, 1.0)
        return cfg.stddev_start + frac * (cfg.stddev_end - cfg.stddev_start)

    def encode(self, obs: np.ndarray, probe: Optional[ActivationProbe] = None) -> Tensor:
        return self.encoder(obs, probe)

    def act(self, obs: np.ndarray, mode: ActMode = "explore", rng: Optional[np.random.Generator] = None) -> np.ndarray:
        if mode not in ("explore", "eval"):
            raise ConfigurationError(f"Unknown act mode '{mode}'")
        pixels = np.asarray(obs)
        if pixels.ndim != 3:
            raise ContractViolation(f"act expects a single [C, H, W] observation, got {pixels.shape}")
        with no_grad():
            mean = self.actor(self.encoder(pixels[None])).data[0].astype(np.float64)
        if mode == "explore":
            if rng is None:
                raise ContractViolation("act(mode='explore') needs an action-noise rng")
            clip = self.config.noise_clip
            mean = mean + np.clip(rng.standard_normal(mean.shape) * self.stddev(), -clip, clip)
        return np.clip(mean, -1.0, 1.0).astype(np.float32)

    # -------------------------------------------------------------- learning
    def td_target(self, batch: Batch, rng: np.random.Generator) -> np.ndarray:
        """``r_n + discount_n * min(Q1', Q2')(next, pi(next) + clipped noise)``, without gradients."""

        cfg = self.config
        sigma = self.stddev() if cfg.target_noise_stddev is None else cfg.target_noise_stddev
        with no_grad():
            features = self.encoder(batch.next_obs_n)
            mean = self.actor(features).data
            noise = np.clip(rng.standard_normal(mean.shape) * sigma, -cfg.noise_clip, cfg.noise_clip)
            next_action = np.clip(mean + noise, -1.0, 1.0)
            q1, q2 = self.critic_target(features, next_action)
            bootstrap = np.minimum(q1.data, q2.data).astype(np.float64)
        return np.asarray(batch.n_step_reward, dtype=np.float64) + np.asarray(batch.discount_n) * bootstrap

    def update_critic(self, batch: Batch, rng: np.random.Generator) -> CriticUpdate:
        """One critic step on ``batch`` (already augmented); also trains the encoder."""

        target = self.td_target(batch, rng)
        features = self.encoder(batch.obs)
        q1, q2 = self.critic(features, batch.action)
        loss = F.mse_loss(q1, target) + F.mse_loss(q2, target)
        penalty = 0.0
        if self.l2_init_coef > 0:
            params = list(self.critic.parameters())
            if self.l2_init_include_encoder:
                params.extend(self.encoder.parameters())
            reg = l2_init_penalty(params, self.l2_init_coef)
            penalty = float(reg.item())
            loss = loss + reg
        value = float(loss.item())
        if not math.isfinite(value):
            raise NonFiniteLossError("critic", value, self.step)

        detached = features.detach()
        self.optimizers["encoder"].zero_grad()
        self.optimizers["critic"].zero_grad()
        loss.backward()
        self.optimizers["critic"].step()
        self.optimizers["encoder"].step()
        self.update_target()
        return CriticUpdate(loss=value, l2_penalty=penalty, features=detached)

    def update_actor(self, batch: Optional[Batch] = None, *, features: Optional[Tensor] = None) -> float:
        """``-mean(min(Q1, Q2)(s, pi(s)))`` with the encoder output detached."""

        if features is None:
            if batch is None:
                raise ContractViolation("update_actor needs a batch or precomputed features")
            with no_grad():
                features = self.encoder(batch.obs)
        features = features.detach()
        q1, q2 = self.critic(features, self.actor(features))
        loss = -F.minimum(q1, q2).mean()
        value = float(loss.item())
        if not math.isfinite(value):
            raise NonFiniteLossError("actor", value, self.step)

        self.optimizers["actor"].zero_grad()
        loss.backward()
        self.optimizers["actor"].step()
        self.critic.zero_grad()
        return value

    def update(
        self,
        batch: Batch,
        rng: np.random.Generator,
        *,
        pad: int = 0,
        aug_rng: Optional[np.random.Generator] = None,
    ) -> UpdateInfo:
        """One full agent update: augment once, critic step, then actor step."""

        if pad > 0:
            shift_rng = rng if aug_rng is None else aug_rng
            batch = batch.replace(
                obs=random_shift(batch.obs, pad, shift_rng),
                next_obs_n=random_shift(batch.next_obs_n, pad, shift_rng),
            )
        critic = self.update_critic(batch, rng)
        actor_loss = self.update_actor(features=critic.features)
        return UpdateInfo(critic_loss=critic.loss, actor_loss=actor_loss)
