"""Pixel actor-critic agent, its checkpoints and the training step."""

from plasticity_lab.agent.agent import Agent, CriticUpdate, UpdateInfo
from plasticity_lab.agent.checkpoint import describe_checkpoint, load_checkpoint, save_checkpoint
from plasticity_lab.agent.config import AgentConfig
from plasticity_lab.agent.networks import Actor, Critic, Encoder
from plasticity_lab.agent.training import StepOutcome, TrainingContext, run_updates, select_action, train_step

__all__ = [
    "Actor",
    "Agent",
    "AgentConfig",
    "Critic",
    "CriticUpdate",
    "Encoder",
    "StepOutcome",
    "TrainingContext",
    "UpdateInfo",
    "describe_checkpoint",
    "load_checkpoint",
    "run_updates",
    "save_checkpoint",
    "select_action",
    "train_step",
]
