"""Error types shared across the lab.

Each subclasses a builtin so callers catching ``ValueError`` or
``RuntimeError`` keep working.
"""

from __future__ import annotations


class ConfigurationError(ValueError):
    """A configuration, shape or naming problem detected before computing."""


class ContractViolation(ValueError):
    """A caller broke an operation's precondition."""


class NotReadyError(RuntimeError):
    """The replay buffer cannot serve a batch yet. Retry after more pushes."""


class NonFiniteLossError(RuntimeError):
    """A training loss became NaN or infinite; the run must stop."""

    def __init__(self, which: str, value: float, step: int | None = None):
        self.which = which
        self.value = value
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"Non-finite {which} loss ({value!r}){where}")
