"""Run every (arm, seed) of an experiment and write its artifacts.

Each run directory ``<output>/<protocol>/<arm>/seed_<seed>/`` holds
``metrics.csv``, ``config.txt``, ``run.json`` and the final checkpoint.
"""

from __future__ import annotations

import json
import logging
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np

from plasticity_lab.adaptive_rr.controller import init_controller, is_check_step, observe_fau
from plasticity_lab.agent.agent import Agent
from plasticity_lab.agent.checkpoint import save_checkpoint
from plasticity_lab.agent.training import TrainingContext, run_updates, train_step
from plasticity_lab.augment.shift import resolve_pad, toggle_events
from plasticity_lab.envlab.base import PixelEnv
from plasticity_lab.envlab.registry import make_env
from plasticity_lab.harness.config import ExperimentConfig, dump_config
from plasticity_lab.harness.metrics import MetricsRow, MetricsWriter
from plasticity_lab.harness.protocols import Arm, expand_arms
from plasticity_lab.plasticity.fau import fau_report
from plasticity_lab.plasticity.schedule import InterventionSchedule, apply_interventions
from plasticity_lab.replay.buffer import ReplayBuffer
from plasticity_lab.utils.config import get_settings
from plasticity_lab.utils.errors import ConfigurationError, NonFiniteLossError
from plasticity_lab.utils.seeding import rng_stream

RunStatus = Literal["completed", "aborted"]


@dataclass(frozen=True)
class RunArtifacts:
    protocol: str
    arm: str
    seed: int
    run_dir: str
    metrics_path: str
    checkpoint_path: Optional[str]
    status: RunStatus
    steps: int
    total_updates: int
    switch_step: Optional[int]
    error: Optional[str] = None


def build_agent(config: ExperimentConfig, rng: np.random.Generator) -> Agent:
    interventions = config.interventions
    return Agent.create(
        config.env.obs_shape,
        config.env.action_dim or 1,
        config.agent,
        rng,
        layer_norm=interventions.layer_norm,
        spectral_norm=interventions.spectral_norm,
        crelu_critic=interventions.crelu_critic,
        weight_decay=interventions.weight_decay,
        l2_init_coef=interventions.l2_init.coef,
        l2_init_include_encoder=interventions.l2_init.include_encoder,
    )


def evaluate(agent: Agent, env: PixelEnv, episodes: int) -> float:
    """Mean return of noiseless episodes."""

    returns = []
    for _ in range(episodes):
        obs = env.reset()
        total, done = 0.0, False
        while not done:
            result = env.step(agent.act(obs.pixels, "eval"))
            total += result.reward
            obs, done = result.obs, result.done
        returns.append(total)
    return float(np.mean(returns))


def ensure_writable(root: Path) -> None:
    """Fail before training when ``root`` cannot hold run outputs."""

    try:
        root.mkdir(parents=True, exist_ok=True)
        probe = root / f".write-probe-{uuid.uuid4().hex}"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"Output directory {root} is not writable: {exc}") from exc


def run_dir_for(root: Path, protocol: str, arm: str, seed: int) -> Path:
    return root / protocol / arm / f"seed_{seed}"


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def run_single(config: ExperimentConfig, arm: Arm, seed: int, root: Path) -> RunArtifacts:
    """Train one seed of one arm to ``total_steps`` (or until a loss diverges)."""

    cfg = arm.apply(config)
    run_dir = run_dir_for(root, cfg.protocol, arm.name, seed)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.txt").write_text(dump_config(cfg), encoding="utf-8")
    metrics_path = run_dir / "metrics.csv"
    logging.info("Starting %s/%s seed %d for %d steps", cfg.protocol, arm.name, seed, cfg.total_steps)

    spec = cfg.env
    env = make_env(spec, rng=rng_stream(seed, "env"))
    eval_env = make_env(spec, rng=rng_stream(seed, "env", "eval")) if cfg.eval.enabled else None
    agent = build_agent(cfg, rng_stream(seed, "init"))
    buffer = ReplayBuffer(cfg.replay.capacity, spec.obs_shape, spec.action_dim or 1)
    controller = init_controller(cfg.rr, cfg.replay.seed_frames, spec.episode_len)
    ctx = TrainingContext(
        agent=agent,
        buffer=buffer,
        controller=controller,
        env=env,
        da=cfg.da,
        pad=resolve_pad(cfg.da, spec.frame_size),
        replay=cfg.replay,
        action_rng=rng_stream(seed, "action_noise"),
        augment_rng=rng_stream(seed, "augment"),
        sample_rng=rng_stream(seed, "sample"),
        target_noise_rng=rng_stream(seed, "action_noise", "target"),
    )
    schedule = InterventionSchedule.from_config(cfg.interventions, cfg.total_steps)
    intervention_rng = rng_stream(seed, "intervention")
    fau_rng = rng_stream(seed, "sample", "fau")
    options = cfg.protocol_options

    status: RunStatus = "completed"
    error: Optional[str] = None
    with MetricsWriter(metrics_path) as writer:
        try:
            while ctx.step < cfg.total_steps:
                outcome = train_step(ctx)
                step = outcome.step
                row = MetricsRow(
                    step=step,
                    episode=ctx.episode,
                    episode_return=outcome.episode_return,
                    critic_loss=outcome.critic_loss,
                    actor_loss=outcome.actor_loss,
                    updates=outcome.updates,
                    da_active=outcome.da_active,
                )

                if arm.priming and step == options.priming_transitions:
                    run_updates(ctx, options.priming_updates)
                    ctx.train_from = step
                    row.updates += options.priming_updates
                    row.events.append("priming")
                    logging.info("Priming: %d updates on %d transitions", options.priming_updates, len(buffer))

                check = is_check_step(controller, step)
                if (step % cfg.fau.interval == 0 or check) and buffer.can_sample(cfg.agent.nstep):
                    eval_batch = buffer.sample_nstep(cfg.fau.batch_size, cfg.agent.nstep, cfg.agent.gamma, fau_rng)
                    report = fau_report(agent, eval_batch, step)
                    row.phi_encoder = report.phi_encoder
                    row.phi_actor = report.phi_actor
                    row.phi_critic = report.phi_critic
                    row.norm_encoder = report.weight_norms["encoder"]
                    row.norm_actor = report.weight_norms["actor"]
                    row.norm_critic = report.weight_norms["critic"]
                    row.norm_total = report.weight_norms["total"]
                    if check and observe_fau(controller, step, report.phi_critic) == "switch":
                        row.events.append("rr_switch")

                event = toggle_events(cfg.da, step)
                if event is not None:
                    row.events.append(event)
                    logging.info("DA %s at step %d", event[3:], step)
                scheduled = schedule.events_at(step)
                if scheduled:
                    apply_interventions(agent, scheduled, cfg.interventions, intervention_rng)
                    row.events.extend(scheduled)

                if (
                    eval_env is not None
                    and outcome.episode_return is not None
                    and ctx.episode % cfg.eval.every_episodes == 0
                ):
                    row.eval_return = evaluate(agent, eval_env, cfg.eval.episodes)

                row.rr_current = controller.rr_current
                row.total_updates = ctx.total_updates
                writer.write(row)
                if outcome.episode_return is not None:
                    writer.flush()
        except NonFiniteLossError as exc:
            status, error = "aborted", str(exc)
            logging.exception("Run %s/%s seed %d aborted", cfg.protocol, arm.name, seed)
            writer.write(
                MetricsRow(
                    step=ctx.step,
                    episode=ctx.episode,
                    rr_current=controller.rr_current,
                    total_updates=ctx.total_updates,
                    events=["abort"],
                )
            )

    checkpoint_path: Optional[str] = None
    if status == "completed":
        checkpoint_path = str(save_checkpoint(agent, run_dir / "checkpoint.npz"))
    artifacts = RunArtifacts(
        protocol=cfg.protocol,
        arm=arm.name,
        seed=seed,
        run_dir=str(run_dir),
        metrics_path=str(metrics_path),
        checkpoint_path=checkpoint_path,
        status=status,
        steps=ctx.step,
        total_updates=ctx.total_updates,
        switch_step=controller.switch_step,
        error=error,
    )
    _write_json(run_dir / "run.json", asdict(artifacts))
    logging.info(
        "Finished %s/%s seed %d: %s after %d steps, %d updates",
        cfg.protocol,
        arm.name,
        seed,
        status,
        ctx.step,
        ctx.total_updates,
    )
    return artifacts


def _run_job(payload: Dict[str, Any]) -> RunArtifacts:
    config = ExperimentConfig.model_validate(payload["config"])
    arm = Arm(**payload["arm"])
    return run_single(config, arm, payload["seed"], Path(payload["root"]))


def run_experiment(config: ExperimentConfig, *, workers: Optional[int] = None) -> List[RunArtifacts]:
    """Run all arms and seeds; results come back ordered by (arm, seed)."""

    root = config.resolved_output_dir
    ensure_writable(root)
    jobs = [(arm, seed) for arm in expand_arms(config) for seed in config.seeds]
    count = workers if workers is not None else get_settings().default_workers
    if count < 1:
        raise ConfigurationError(f"workers must be >= 1, got {count}")

    if count == 1 or len(jobs) == 1:
        return [run_single(config, arm, seed, root) for arm, seed in jobs]

    payloads = [
        {
            "config": config.model_dump(mode="python"),
            "arm": asdict(arm),
            "seed": seed,
            "root": str(root),
        }
        for arm, seed in jobs
    ]
    with ProcessPoolExecutor(max_workers=count) as pool:
        return list(pool.map(_run_job, payloads))
