"""Mean and std curves across seeds, rendered to SVG."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Literal

import numpy as np

from plasticity_lab.harness.metrics import read_metrics
from plasticity_lab.utils.errors import ConfigurationError

PlotKind = Literal["return", "fau"]

PLOT_COLUMNS: Dict[str, List[str]] = {
    "return": ["episode_return"],
    "fau": ["phi_encoder", "phi_actor", "phi_critic"],
}


@dataclass(frozen=True)
class CurveSummary:
    arm: str
    column: str
    steps: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    runs: int


def arm_of(path: Path) -> str:
    """``<output>/<protocol>/<arm>/seed_<n>/metrics.csv`` -> ``<arm>``."""

    return path.parent.parent.name


def summarize_runs(csv_paths: Iterable[str | Path], column: str) -> Dict[str, CurveSummary]:
    """Group CSVs by arm and compute the per-step mean and std of ``column``.

    Only rows with a value in ``column`` are used. Every run of an arm must
    report the column at the same steps.
    """

    grouped: Dict[str, List[Path]] = {}
    for raw in csv_paths:
        path = Path(raw)
        grouped.setdefault(arm_of(path), []).append(path)
    if not grouped:
        raise ConfigurationError("No metrics files to summarize")

    missing = []
    summaries: Dict[str, CurveSummary] = {}
    for arm in sorted(grouped):
        steps_ref = None
        curves = []
        mismatched = []
        for path in sorted(grouped[arm]):
            data = read_metrics(path)
            if column not in data or "step" not in data:
                logging.warning("%s has no '%s' column", path, column)
                missing.append(str(path))
                continue
            values = data[column]
            keep = ~np.isnan(values)
            steps = data["step"][keep]
            if steps_ref is None:
                steps_ref = steps
            elif not np.array_equal(steps, steps_ref):
                mismatched.append(str(path))
                continue
            curves.append(values[keep])
        if mismatched:
            raise ConfigurationError(
                f"Runs of arm '{arm}' report '{column}' at different steps: {', '.join(mismatched)}"
            )
        if curves and steps_ref is not None:
            stacked = np.vstack(curves)
            summaries[arm] = CurveSummary(
                arm=arm,
                column=column,
                steps=steps_ref,
                mean=stacked.mean(axis=0),
                std=stacked.std(axis=0),
                runs=len(curves),
            )
    if missing:
        raise ConfigurationError(f"Metrics files without column '{column}': {', '.join(missing)}")
    return summaries


def plot(csv_paths: Iterable[str | Path], kind: PlotKind, out_path: str | Path) -> Path:
    """Draw one line per arm with a +-1 std band; byte-identical output for identical input."""

    if kind not in PLOT_COLUMNS:
        raise ConfigurationError(f"Unknown plot kind '{kind}'; expected one of {sorted(PLOT_COLUMNS)}")
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - optional extra
        raise ImportError("Plotting requires matplotlib; install plasticity-lab[plot]") from exc

    paths = [Path(p) for p in csv_paths]
    columns = PLOT_COLUMNS[kind]
    summaries = {column: summarize_runs(paths, column) for column in columns}

    target = Path(out_path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "plasticity-lab", "svg.fonttype": "path"}):
        fig, axes = plt.subplots(1, len(columns), figsize=(5 * len(columns), 3.6), squeeze=False)
        for ax, column in zip(axes[0], columns):
            for arm, curve in summaries[column].items():
                (line,) = ax.plot(curve.steps, curve.mean, label=f"{arm} (n={curve.runs})", linewidth=1.4)
                ax.fill_between(
                    curve.steps,
                    curve.mean - curve.std,
                    curve.mean + curve.std,
                    color=line.get_color(),
                    alpha=0.2,
                    linewidth=0,
                )
            ax.set_xlabel("environment step")
            ax.set_ylabel(column)
            ax.grid(alpha=0.3)
            if summaries[column]:
                ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(target, format="svg", metadata={"Date": None})
        plt.close(fig)
    logging.info("Wrote %s plot of %d runs to %s", kind, len(paths), target)
    return target
