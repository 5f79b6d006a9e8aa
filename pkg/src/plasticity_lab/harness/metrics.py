"""Per-step metrics rows and their CSV file."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from plasticity_lab.utils.errors import ConfigurationError, ContractViolation

EVENT_NAMES = frozenset(
    {"reset", "injection", "rr_switch", "da_on", "da_off", "priming", "shrink_perturb", "abort"}
)


class MetricsRow(BaseModel):
    """One CSV row. Empty optional fields are written as empty cells."""

    step: int = Field(ge=0)
    episode: int = Field(default=0, ge=0)
    episode_return: Optional[float] = None
    eval_return: Optional[float] = None
    critic_loss: Optional[float] = None
    actor_loss: Optional[float] = None
    phi_encoder: Optional[float] = None
    phi_actor: Optional[float] = None
    phi_critic: Optional[float] = None
    rr_current: float = 0.0
    updates: int = 0
    total_updates: int = 0
    da_active: bool = False
    norm_encoder: Optional[float] = None
    norm_actor: Optional[float] = None
    norm_critic: Optional[float] = None
    norm_total: Optional[float] = None
    events: List[str] = Field(default_factory=list)


COLUMNS: List[str] = [name for name in MetricsRow.model_fields if name != "events"] + ["event"]


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


class MetricsWriter:
    """Append-only CSV writer; steps must strictly increase."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(COLUMNS)
        self._last_step: Optional[int] = None
        self.rows = 0

    def write(self, row: MetricsRow) -> None:
        if self._last_step is not None and row.step <= self._last_step:
            raise ContractViolation(f"Metrics step {row.step} does not follow {self._last_step}")
        unknown = [e for e in row.events if e not in EVENT_NAMES]
        if unknown:
            raise ConfigurationError(f"Unknown metrics events: {unknown}")
        values = [_cell(getattr(row, name)) for name in COLUMNS[:-1]]
        values.append("|".join(row.events))
        self._writer.writerow(values)
        self._last_step = row.step
        self.rows += 1

    def flush(self) -> None:
        self._file.flush()

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_metrics(path: str | Path) -> Dict[str, np.ndarray]:
    """Load a metrics CSV as column arrays; empty numeric cells become NaN.

    The ``event`` column is returned as an object array of strings.
    """

    with Path(path).open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"{path}: empty metrics file")
        rows = list(reader)
    columns: Dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        cells = [row[i] if i < len(row) else "" for row in rows]
        if name == "event":
            columns[name] = np.array(cells, dtype=object)
        else:
            columns[name] = np.array([float(c) if c else np.nan for c in cells], dtype=np.float64)
    return columns
