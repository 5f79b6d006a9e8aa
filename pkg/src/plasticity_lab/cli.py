"""Command-line interface for the plasticity lab.

``run`` trains every arm and seed of an experiment config, ``plot`` draws
mean/std curves from metrics CSVs, ``inspect`` summarizes a checkpoint and
``acceptance`` reports the directional checks over a run root.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from plasticity_lab.agent.checkpoint import describe_checkpoint
from plasticity_lab.harness.acceptance import summarize_acceptance
from plasticity_lab.harness.config import ExperimentConfig, load_config
from plasticity_lab.harness.plotting import plot
from plasticity_lab.harness.runner import RunArtifacts, run_experiment
from plasticity_lab.utils.config import apply_overrides, get_settings, parse_assignments, split_list
from plasticity_lab.utils.errors import ConfigurationError


def _parse_seeds(values: List[str]) -> List[int]:
    seeds: List[int] = []
    for value in values:
        seeds.extend(int(item) for item in split_list(value))
    return seeds


def prepare_config(
    path: str | Path,
    *,
    overrides: Optional[List[str]] = None,
    seeds: Optional[List[str]] = None,
    output: Optional[str] = None,
) -> ExperimentConfig:
    """Load ``path`` and apply CLI overrides (``--set``, ``--seed``, ``--output``)."""

    config = load_config(path)
    assignments: Dict[str, Any] = parse_assignments(overrides or [])
    if seeds:
        assignments["seeds"] = _parse_seeds(seeds)
    if output:
        assignments["output_dir"] = output
    return apply_overrides(config, assignments)


def _summarize(results: List[RunArtifacts]) -> None:
    for artifacts in results:
        mark = "✓" if artifacts.status == "completed" else "✗"
        line = f"{mark} {artifacts.protocol}/{artifacts.arm} seed {artifacts.seed}: {artifacts.status}, "
        line += f"{artifacts.steps} steps, {artifacts.total_updates} updates"
        if artifacts.switch_step is not None:
            line += f", RR switch at {artifacts.switch_step}"
        print(line)
        print(f"  Metrics: {artifacts.metrics_path}")
        if artifacts.error:
            print(f"  Error: {artifacts.error}")


def _run_run(args: argparse.Namespace) -> int:
    try:
        config = prepare_config(args.config, overrides=args.set, seeds=args.seed, output=args.output)
        results = run_experiment(config, workers=args.workers)
    except (ConfigurationError, ValidationError, OSError) as exc:
        print(f"✗ Failed to run experiment: {exc}")
        return 1

    _summarize(results)
    aborted = sum(1 for r in results if r.status != "completed")
    print(f"✓ Wrote {len(results)} runs to {config.resolved_output_dir}")
    return 1 if aborted else 0


def _run_plot(args: argparse.Namespace) -> int:
    paths = sorted(glob.glob(args.pattern, recursive=True))
    if not paths:
        print(f"✗ Failed to plot: no files match {args.pattern}")
        return 1
    try:
        target = plot(paths, args.kind, args.out)
    except (ConfigurationError, OSError, ImportError) as exc:
        print(f"✗ Failed to plot: {exc}")
        return 1
    print(f"✓ Plot written to {target}")
    return 0


def _run_inspect(args: argparse.Namespace) -> int:
    try:
        summary = describe_checkpoint(args.checkpoint)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"✗ Failed to inspect checkpoint: {exc}")
        return 1

    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0
    print(f"✓ Checkpoint {summary['path']}")
    print(f"  Format version: {summary['format_version']}")
    print(f"  Step: {summary['step']}")
    if summary["injected"]:
        print(f"  Injected: {', '.join(summary['injected'])}")
    for group, entry in summary["groups"].items():
        print(f"  {group}: {entry['tensors']} tensors, {entry['values']} values, norm {entry['norm']:.4f}")
    return 0


def _run_acceptance(args: argparse.Namespace) -> int:
    try:
        results = summarize_acceptance(args.run_root, episodes=args.episodes)
    except (ConfigurationError, ValidationError, OSError) as exc:
        print(f"✗ Failed to check runs: {exc}")
        return 1

    if args.json:
        print(json.dumps([{**asdict(r), "failed": r.failed} for r in results], indent=2, sort_keys=True))
    else:
        marks = {"pass": "✓", "fail": "✗", "missing": "-"}
        for result in results:
            kind = "required" if result.required else "outcome"
            print(f"{marks[result.outcome]} {result.name} ({kind}): {result.outcome}")
            print(f"  {result.detail}")
    return 1 if any(r.failed for r in results) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Plasticity lab CLI")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run an experiment config")
    run.add_argument("config", type=str, help="Flat text experiment config")
    run.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a dotted config key (repeatable)",
    )
    run.add_argument(
        "--seed",
        action="append",
        default=[],
        help="Root seed(s) replacing the config's seeds (repeatable or comma separated)",
    )
    run.add_argument("--output", type=str, default=None, help="Output directory for run artifacts")
    run.add_argument("--workers", type=int, default=None, help="Worker processes for (arm, seed) jobs")
    run.set_defaults(func=_run_run)

    plot_cmd = subparsers.add_parser("plot", help="Plot mean/std curves from metrics CSVs")
    plot_cmd.add_argument("pattern", type=str, help="Glob matching metrics.csv files")
    plot_cmd.add_argument("--kind", choices=["return", "fau"], default="return", help="Curve to plot")
    plot_cmd.add_argument("--out", type=str, default="plot.svg", help="SVG output path")
    plot_cmd.set_defaults(func=_run_plot)

    inspect = subparsers.add_parser("inspect", help="Summarize a checkpoint")
    inspect.add_argument("checkpoint", type=str, help="Path to checkpoint.npz")
    inspect.add_argument("--json", action="store_true", help="Print the summary as JSON")
    inspect.set_defaults(func=_run_inspect)

    acceptance = subparsers.add_parser("acceptance", help="Report directional checks over finished runs")
    acceptance.add_argument("run_root", type=str, help="Output directory holding <protocol>/<arm>/seed_<n>/ runs")
    acceptance.add_argument("--episodes", type=int, default=10, help="Final episodes averaged per run")
    acceptance.add_argument("--json", action="store_true", help="Print the results as JSON")
    acceptance.set_defaults(func=_run_acceptance)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, get_settings().log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
