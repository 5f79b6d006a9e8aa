"""Replay-ratio scheduling."""

from plasticity_lab.adaptive_rr.controller import (
    RRConfig,
    RRControllerState,
    RRSummary,
    describe,
    init_controller,
    is_check_step,
    observe_fau,
    updates_due,
)

__all__ = [
    "RRConfig",
    "RRControllerState",
    "RRSummary",
    "describe",
    "init_controller",
    "is_check_step",
    "observe_fau",
    "updates_due",
]
