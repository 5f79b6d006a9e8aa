"""One environment interaction followed by the updates the replay ratio owes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from plasticity_lab.adaptive_rr.controller import RRControllerState, updates_due
from plasticity_lab.agent.agent import Agent
from plasticity_lab.augment.shift import ShiftAugmentConfig, da_active
from plasticity_lab.envlab.base import PixelEnv
from plasticity_lab.envlab.spec import Observation
from plasticity_lab.replay.buffer import ReplayBuffer, ReplayConfig, Transition
from plasticity_lab.utils.errors import ContractViolation


@dataclass
class TrainingContext:
    """Everything a training step reads or mutates.

    ``train_from`` is the first step at which updates may run; it starts at
    ``replay.seed_frames`` and heavy priming moves it earlier.
    """

    agent: Agent
    buffer: ReplayBuffer
    controller: RRControllerState
    env: PixelEnv
    da: ShiftAugmentConfig
    pad: int
    replay: ReplayConfig
    action_rng: np.random.Generator
    augment_rng: np.random.Generator
    sample_rng: np.random.Generator
    target_noise_rng: np.random.Generator
    train_from: Optional[int] = None
    step: int = 0
    total_updates: int = 0
    episode: int = 0
    episode_return: float = 0.0
    obs: Optional[Observation] = None

    def __post_init__(self) -> None:
        if self.train_from is None:
            self.train_from = self.replay.seed_frames

    @property
    def training(self) -> bool:
        assert self.train_from is not None
        return self.step >= self.train_from


@dataclass(frozen=True)
class StepOutcome:
    step: int
    reward: float
    updates: int
    da_active: bool
    episode_return: Optional[float] = None
    critic_loss: Optional[float] = None
    actor_loss: Optional[float] = None


def select_action(ctx: TrainingContext) -> np.ndarray:
    """Uniform random during the exploration phase, else the noisy policy."""

    if ctx.obs is None:
        raise ContractViolation("select_action called before the environment was reset")
    if ctx.step < ctx.replay.exploration_steps:
        return ctx.action_rng.uniform(-1.0, 1.0, size=ctx.env.spec.action_dim).astype(np.float32)
    return ctx.agent.act(ctx.obs.pixels, "explore", ctx.action_rng)


def run_updates(ctx: TrainingContext, count: int) -> List[tuple[float, float]]:
    """Perform ``count`` agent updates on freshly sampled batches."""

    cfg = ctx.agent.config
    pad = ctx.pad if da_active(ctx.da, ctx.step) else 0
    losses = []
    for _ in range(count):
        batch = ctx.buffer.sample_nstep(cfg.batch_size, cfg.nstep, cfg.gamma, ctx.sample_rng)
        info = ctx.agent.update(batch, ctx.target_noise_rng, pad=pad, aug_rng=ctx.augment_rng)
        losses.append((info.critic_loss, info.actor_loss))
    ctx.total_updates += count
    return losses


def train_step(ctx: TrainingContext) -> StepOutcome:
    """act, env.step, buffer.push, then ``updates_due`` agent updates once training has started."""

    if ctx.obs is None:
        ctx.obs = ctx.env.reset()
        ctx.episode_return = 0.0
    action = select_action(ctx)
    result = ctx.env.step(action)
    ctx.buffer.push(
        Transition(
            obs=ctx.obs.pixels,
            action=action,
            reward=result.reward,
            discount=1.0,
            next_obs=result.obs.pixels,
            last=result.done,
        )
    )
    ctx.step += 1
    ctx.agent.step = ctx.step
    ctx.episode_return += result.reward
    ctx.obs = result.obs

    updates = 0
    critic_loss = actor_loss = None
    if ctx.training:
        updates = updates_due(ctx.controller)
        if updates:
            losses = run_updates(ctx, updates)
            critic_loss = float(np.mean([c for c, _ in losses]))
            actor_loss = float(np.mean([a for _, a in losses]))

    finished: Optional[float] = None
    if result.done:
        finished = ctx.episode_return
        ctx.episode += 1
        ctx.obs = None
    return StepOutcome(
        step=ctx.step,
        reward=result.reward,
        updates=updates,
        da_active=da_active(ctx.da, ctx.step),
        episode_return=finished,
        critic_loss=critic_loss,
        actor_loss=actor_loss,
    )
