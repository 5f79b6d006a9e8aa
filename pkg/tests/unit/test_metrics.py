from __future__ import annotations

from pathlib import Path
from typing import Dict, List

import numpy as np
import pytest

from plasticity_lab.harness.metrics import COLUMNS, MetricsRow, MetricsWriter, read_metrics
from plasticity_lab.harness.plotting import arm_of, plot, summarize_runs
from plasticity_lab.utils.errors import ConfigurationError, ContractViolation


def write_run(root: Path, arm: str, seed: int, returns: Dict[int, float], *, last_step: int = 100) -> Path:
    path = root / "standard" / arm / f"seed_{seed}" / "metrics.csv"
    with MetricsWriter(path) as writer:
        for step in range(1, last_step + 1):
            writer.write(MetricsRow(step=step, episode_return=returns.get(step)))
    return path


def test_writer_emits_header_and_empty_cells(tmp_path):
    path = tmp_path / "run" / "metrics.csv"
    with MetricsWriter(path) as writer:
        writer.write(MetricsRow(step=1, critic_loss=0.5, da_active=True))
        writer.write(MetricsRow(step=2, critic_loss=float("nan"), events=["reset", "rr_switch"]))
        assert writer.rows == 2

    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == COLUMNS
    assert COLUMNS[-1] == "event"
    first = dict(zip(COLUMNS, lines[1].split(",")))
    second = dict(zip(COLUMNS, lines[2].split(",")))
    assert first["critic_loss"] == "0.5"
    assert first["da_active"] == "1"
    assert first["episode_return"] == ""
    assert second["critic_loss"] == ""
    assert second["event"] == "reset|rr_switch"
    assert "nan" not in path.read_text(encoding="utf-8").lower()


def test_writer_requires_increasing_steps(tmp_path):
    with MetricsWriter(tmp_path / "metrics.csv") as writer:
        writer.write(MetricsRow(step=5))
        with pytest.raises(ContractViolation):
            writer.write(MetricsRow(step=5))
        with pytest.raises(ConfigurationError):
            writer.write(MetricsRow(step=6, events=["party"]))


def test_read_metrics_round_trips_columns(tmp_path):
    path = write_run(tmp_path, "a", 0, {50: 10.0, 100: 20.0})
    data = read_metrics(path)

    np.testing.assert_array_equal(data["step"], np.arange(1, 101))
    assert np.isnan(data["episode_return"][0])
    assert data["episode_return"][49] == 10.0
    assert data["event"].dtype == object

    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        read_metrics(empty)


def test_summary_matches_hand_computed_statistics(tmp_path):
    paths = [
        write_run(tmp_path, "a", 0, {50: 10.0, 100: 20.0}),
        write_run(tmp_path, "a", 1, {50: 14.0, 100: 26.0}),
        write_run(tmp_path, "b", 0, {50: 1.0, 100: 2.0}),
    ]
    summaries = summarize_runs(paths, "episode_return")

    assert list(summaries) == ["a", "b"]
    a = summaries["a"]
    np.testing.assert_array_equal(a.steps, [50, 100])
    np.testing.assert_allclose(a.mean, [12.0, 23.0])
    np.testing.assert_allclose(a.std, [2.0, 3.0])
    assert a.runs == 2
    np.testing.assert_array_equal(summaries["b"].std, [0.0, 0.0])
    assert arm_of(paths[2]) == "b"


def test_identical_runs_have_zero_spread(tmp_path):
    returns = {25: 3.0, 50: 4.0}
    paths = [write_run(tmp_path, "a", seed, returns, last_step=50) for seed in range(3)]
    summary = summarize_runs(paths, "episode_return")["a"]
    np.testing.assert_array_equal(summary.std, [0.0, 0.0])
    np.testing.assert_array_equal(summary.mean, [3.0, 4.0])


def test_mismatched_steps_are_rejected(tmp_path):
    paths = [
        write_run(tmp_path, "a", 0, {50: 1.0, 100: 2.0}),
        write_run(tmp_path, "a", 1, {40: 1.0, 100: 2.0}),
    ]
    with pytest.raises(ConfigurationError, match="different steps"):
        summarize_runs(paths, "episode_return")


def test_missing_column_is_rejected(tmp_path):
    path = tmp_path / "standard" / "a" / "seed_0" / "metrics.csv"
    path.parent.mkdir(parents=True)
    path.write_text("step,other\n1,2\n", encoding="utf-8")
    with pytest.raises(ConfigurationError, match="without column"):
        summarize_runs([path], "episode_return")
    with pytest.raises(ConfigurationError):
        summarize_runs([], "episode_return")


def test_svg_output_is_deterministic(tmp_path):
    pytest.importorskip("matplotlib")
    paths: List[Path] = [
        write_run(tmp_path, "a", seed, {50: 10.0 + seed, 100: 20.0 - seed}) for seed in range(2)
    ]
    first = plot(paths, "return", tmp_path / "one.svg")
    second = plot(paths, "return", tmp_path / "two.svg")

    assert first.read_bytes() == second.read_bytes()
    assert first.read_bytes().lstrip().startswith(b"<?xml")
    with pytest.raises(ConfigurationError):
        plot(paths, "loss", tmp_path / "bad.svg")  # type: ignore[arg-type]
