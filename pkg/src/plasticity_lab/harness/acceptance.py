"""Directional checks over finished runs.

Three checks read the metrics CSVs under a run root:

* ``da_gap``: DA-on final return minus DA-off final return, against the
  pooled std of the two arms.
* ``switch_fau``: critic FAU of the adaptive arm at its RR switch, against
  the static high-RR arm at the same step.
* ``switch_conservation``: every adaptive run switches exactly once and its
  update total equals ``low * pre-switch steps + high * post-switch steps``
  within one update.

The first two are outcomes of the experiment on toy tasks and may fail
without anything being broken. Only ``switch_conservation`` is required.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional

import numpy as np

from plasticity_lab.harness.config import load_config
from plasticity_lab.harness.metrics import read_metrics
from plasticity_lab.utils.errors import ConfigurationError

Outcome = Literal["pass", "fail", "missing"]

# (protocol, DA-on arm, DA-off arm), first match wins
DA_PAIRS = (
    ("factorial_da_reset", "da_noreset", "noda_noreset"),
    ("da_toggle", "always_on", "always_off"),
    ("interventions", "da", "baseline"),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    outcome: Outcome
    required: bool
    detail: str
    values: Dict[str, float] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.required and self.outcome == "fail"


def seed_runs(root: str | Path, protocol: str, arm: str) -> Dict[int, Path]:
    """``seed -> metrics.csv`` for one arm of one protocol."""

    runs: Dict[int, Path] = {}
    for path in sorted((Path(root) / protocol / arm).glob("seed_*/metrics.csv")):
        runs[int(path.parent.name[len("seed_") :])] = path
    return runs


def event_steps(data: Dict[str, np.ndarray], event: str) -> List[int]:
    return [int(s) for s, e in zip(data["step"], data["event"]) if event in str(e).split("|")]


def final_return(path: str | Path, episodes: int = 10) -> float:
    """Mean return of the last ``episodes`` finished training episodes."""

    returns = read_metrics(path)["episode_return"]
    finished = returns[~np.isnan(returns)]
    if finished.size == 0:
        raise ConfigurationError(f"{path}: no finished episodes")
    return float(finished[-episodes:].mean())


def phi_at(data: Dict[str, np.ndarray], step: int) -> float:
    """Critic FAU of the last measurement at or before ``step``; NaN if none."""

    mask = (data["step"] <= step) & ~np.isnan(data["phi_critic"])
    if not mask.any():
        return float("nan")
    return float(data["phi_critic"][mask][-1])


def da_gap(on_paths: Iterable[str | Path], off_paths: Iterable[str | Path], *, episodes: int = 10) -> CheckResult:
    on = np.array([final_return(p, episodes) for p in on_paths])
    off = np.array([final_return(p, episodes) for p in off_paths])
    if on.size == 0 or off.size == 0:
        return CheckResult("da_gap", "missing", False, "needs finished DA-on and DA-off runs")
    pooled = float(np.sqrt((on.var() + off.var()) / 2.0))
    gap = float(on.mean() - off.mean())
    outcome: Outcome = "pass" if gap > pooled else "fail"
    detail = (
        f"DA-on {on.mean():.3f} vs DA-off {off.mean():.3f} over {on.size}/{off.size} runs: "
        f"gap {gap:.3f}, pooled std {pooled:.3f}"
    )
    values = {
        "mean_on": float(on.mean()),
        "mean_off": float(off.mean()),
        "gap": gap,
        "pooled_std": pooled,
    }
    return CheckResult("da_gap", outcome, False, detail, values)


def switch_fau(adaptive: Dict[int, Path], static_high: Dict[int, Path]) -> CheckResult:
    adaptive_phi, static_phi = [], []
    for seed in sorted(set(adaptive) & set(static_high)):
        data = read_metrics(adaptive[seed])
        switches = event_steps(data, "rr_switch")
        if not switches:
            continue
        a = phi_at(data, switches[0])
        s = phi_at(read_metrics(static_high[seed]), switches[0])
        if np.isfinite(a) and np.isfinite(s):
            adaptive_phi.append(a)
            static_phi.append(s)
    if not adaptive_phi:
        return CheckResult("switch_fau", "missing", False, "no seed has a switch and a static high-RR FAU to compare")
    a_mean, s_mean = float(np.mean(adaptive_phi)), float(np.mean(static_phi))
    outcome: Outcome = "pass" if a_mean > s_mean else "fail"
    detail = f"critic FAU at the switch: adaptive {a_mean:.4f} vs static high {s_mean:.4f} over {len(adaptive_phi)} seeds"
    values = {"adaptive_phi": a_mean, "static_phi": s_mean, "seeds": float(len(adaptive_phi))}
    return CheckResult("switch_fau", outcome, False, detail, values)


def _conservation_error(path: Path) -> Optional[str]:
    data = read_metrics(path)
    config = load_config(path.parent / "config.txt")
    if config.rr.mode != "adaptive":
        return f"{path}: not an adaptive run"
    if event_steps(data, "abort"):
        return f"{path}: run aborted"
    switches = event_steps(data, "rr_switch")
    if len(switches) != 1:
        return f"{path}: {len(switches)} switches"
    switch, last = switches[0], int(data["step"][-1])
    pre = max(switch - config.replay.seed_frames + 1, 0)
    expected = config.rr.low * pre + config.rr.high * (last - switch)
    total = float(data["total_updates"][-1])
    if abs(total - expected) > 1.0:
        return f"{path}: {total:g} updates, expected {expected:g}"
    return None


def switch_conservation(adaptive: Dict[int, Path]) -> CheckResult:
    if not adaptive:
        return CheckResult("switch_conservation", "missing", True, "no adaptive runs")
    errors = [e for e in (_conservation_error(p) for p in adaptive.values()) if e]
    if errors:
        return CheckResult("switch_conservation", "fail", True, "; ".join(errors), {"runs": float(len(adaptive))})
    detail = f"{len(adaptive)} adaptive runs switch once and conserve updates"
    return CheckResult("switch_conservation", "pass", True, detail, {"runs": float(len(adaptive))})


def summarize_acceptance(run_root: str | Path, *, episodes: int = 10) -> List[CheckResult]:
    """Run every check over the protocol directories found under ``run_root``."""

    root = Path(run_root)
    if not root.is_dir():
        raise ConfigurationError(f"Run root {root} does not exist")

    gap = CheckResult("da_gap", "missing", False, "no DA-on/DA-off arms under the run root")
    for protocol, on_arm, off_arm in DA_PAIRS:
        on, off = seed_runs(root, protocol, on_arm), seed_runs(root, protocol, off_arm)
        if on and off:
            gap = da_gap(on.values(), off.values(), episodes=episodes)
            break

    adaptive = seed_runs(root, "adaptive_rr", "adaptive")
    results = [
        gap,
        switch_fau(adaptive, seed_runs(root, "adaptive_rr", "static_high")),
        switch_conservation(adaptive),
    ]
    for result in results:
        logging.info("Acceptance %s: %s (%s)", result.name, result.outcome, result.detail)
    return results
