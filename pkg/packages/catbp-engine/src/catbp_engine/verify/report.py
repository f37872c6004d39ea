"""Study reports: metric rows whose verdicts are recomputed from stored numbers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import StrEnum
from typing import Any

import pandas as pd

#: Column order of the flat CSV form.
COLUMNS = ("study", "param", "metric", "value", "stderr", "tolerance", "rule", "verdict")


class Rule(StrEnum):
    """How a metric value is compared against its tolerance."""

    BELOW = "below"
    """``value < tolerance``."""

    AT_MOST = "at_most"
    """``value <= tolerance``."""

    ABOVE = "above"
    """``value > tolerance``."""

    WITHIN_SE = "within_se"
    """``|value| <= tolerance · stderr``; ``value`` is an estimate minus its target."""

    RECORD = "record"
    """Informational row without a verdict."""


@dataclass(frozen=True, slots=True)
class MetricRow:
    """One measured quantity of a study.

    Attributes:
        study: Study id.
        param: Sweep value the row belongs to, as text (``"n=100"``).
        metric: Metric name.
        value: Measured value.
        stderr: Monte Carlo standard error, NaN when not applicable.
        tolerance: Threshold, or number of standard errors for ``within_se``.
        rule: Comparison rule.
    """

    study: str
    param: str
    metric: str
    value: float
    stderr: float = math.nan
    tolerance: float = math.nan
    rule: Rule = Rule.RECORD

    @property
    def verdict(self) -> bool | None:
        match self.rule:
            case Rule.BELOW:
                return bool(self.value < self.tolerance)
            case Rule.AT_MOST:
                return bool(self.value <= self.tolerance)
            case Rule.ABOVE:
                return bool(self.value > self.tolerance)
            case Rule.WITHIN_SE:
                return bool(abs(self.value) <= self.tolerance * self.stderr)
            case _:
                return None

    def as_dict(self) -> dict[str, Any]:
        row = asdict(self)
        row["rule"] = str(self.rule)
        row["verdict"] = self.verdict
        return row


@dataclass(frozen=True, slots=True)
class StudyReport:
    """Outcome of one verification study.

    Attributes:
        study: Study id (``diffusion_limit``, ``stationary``, …).
        sweep: Parameter values swept over, in run order.
        rows: Metric rows, in emission order.
        seed: Master seed of the run.
        runtime: Wall-clock seconds.
        settings: Non-sweep inputs (horizon, reps, dt, …) echoed verbatim.
        notes: Free-text remarks, e.g. why a row carries no verdict.
    """

    study: str
    sweep: tuple[Any, ...]
    rows: tuple[MetricRow, ...]
    seed: int
    runtime: float = 0.0
    settings: dict[str, Any] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def verdicts(self) -> list[bool]:
        return [v for v in (row.verdict for row in self.rows) if v is not None]

    @property
    def passed(self) -> bool:
        """True when every row that carries a verdict passes."""
        return all(self.verdicts)

    @property
    def failures(self) -> list[MetricRow]:
        return [row for row in self.rows if row.verdict is False]

    def metric(self, name: str, param: str | None = None) -> MetricRow:
        """First row with the given metric name (and sweep value)."""
        for row in self.rows:
            if row.metric == name and (param is None or row.param == param):
                return row
        raise KeyError(f"{self.study} has no metric {name!r}" + (f" at {param}" if param else ""))

    def to_json(self) -> dict[str, Any]:
        """JSON-ready document; non-finite numbers become ``None``."""
        return {
            "study": self.study,
            "sweep": list(self.sweep),
            "seed": self.seed,
            "runtime": self.runtime,
            "settings": dict(self.settings),
            "notes": list(self.notes),
            "passed": self.passed,
            "rows": [{k: _finite_or_none(v) for k, v in row.as_dict().items()} for row in self.rows],
        }

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> StudyReport:
        """Rebuild a report; verdicts are recomputed, not read back."""
        rows = tuple(
            MetricRow(
                study=r["study"],
                param=r["param"],
                metric=r["metric"],
                value=_nan_if_none(r["value"]),
                stderr=_nan_if_none(r["stderr"]),
                tolerance=_nan_if_none(r["tolerance"]),
                rule=Rule(r["rule"]),
            )
            for r in document["rows"]
        )
        return cls(
            study=document["study"],
            sweep=tuple(document["sweep"]),
            rows=rows,
            seed=document["seed"],
            runtime=document.get("runtime", 0.0),
            settings=dict(document.get("settings", {})),
            notes=tuple(document.get("notes", ())),
        )

    def to_frame(self) -> pd.DataFrame:
        """Flat table with one line per metric row."""
        return pd.DataFrame([row.as_dict() for row in self.rows], columns=list(COLUMNS))


def _finite_or_none(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _nan_if_none(value: float | None) -> float:
    return math.nan if value is None else float(value)
