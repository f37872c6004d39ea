"""Rich tables for the human-readable summaries the CLI prints to stderr.

Data files never go through this module; it renders validation reports,
family diagnostics and study verdicts. Colour is dropped automatically
under ``NO_COLOR`` or when stderr is not a terminal.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

from rich.box import ROUNDED, SIMPLE_HEAD
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from catbp_core import FamilyReport, ValidationReport

from ..verify.report import MetricRow, StudyReport


@dataclass(frozen=True, slots=True)
class Palette:
    """Rich style strings for the report tables.

    Attributes:
        value: Parameter names, metrics and numbers.
        muted: Standard errors, tolerances, rules and details.
        frame: Panel border when there is nothing to judge.
        heading: Column headers and panel titles.
        passed: Verdict text and border of a passing report.
        failed: Verdict text and border of a failing report.
        note: Notes and family flags printed below a panel.
    """

    value: str = "grey85"
    muted: str = "grey46"
    frame: str = "grey50"
    heading: str = "bold grey78"
    passed: str = "green3"
    failed: str = "indian_red1"
    note: str = "light_goldenrod3"


DEFAULT_PALETTE = Palette()


def _number(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "–"
    return f"{value:.6g}"


class ReportView:
    """Stateless renderer bound to one console (stderr by default)."""

    def __init__(self, console: Console | None = None, palette: Palette = DEFAULT_PALETTE) -> None:
        self.console: Console = console or Console(stderr=True)
        self.palette = palette

    # ------------------------------------------------------------------
    # Parameter checks
    # ------------------------------------------------------------------

    def show_validation(self, report: ValidationReport, title: str = "Parameter check") -> None:
        table = Table(box=SIMPLE_HEAD, header_style=self.palette.heading)
        table.add_column("condition", style=self.palette.value)
        table.add_column("", justify="center")
        table.add_column("detail", style=self.palette.muted)
        for check in report.checks:
            table.add_row(check.name, self._verdict(check.passed), check.detail)
        self.console.print(self._panel(table, title, report.passed))
        for note in report.notes:
            self.console.print(Text(f"  note: {note}", style=self.palette.note))

    def show_family(self, report: FamilyReport) -> None:
        table = Table(box=SIMPLE_HEAD, header_style=self.palette.heading)
        for name in ("n", "tail1", "tail2", "c1", "c2", "alpha1", "alpha2", "mgf1"):
            table.add_column(name, justify="right", style=self.palette.value)
        for row in report.rows:
            table.add_row(
                str(row.n),
                *(_number(getattr(row, name)) for name in ("tail1", "tail2", "c1", "c2", "alpha1", "alpha2", "mgf1")),
            )
        verdict = report.tails_vanishing
        self.console.print(self._panel(table, f"Family check (epsilon={report.epsilon:g})", verdict))
        for flag in report.flags:
            self.console.print(Text(f"  {flag}", style=self.palette.note))

    # ------------------------------------------------------------------
    # Studies
    # ------------------------------------------------------------------

    def show_study(self, report: StudyReport) -> None:
        table = Table(box=SIMPLE_HEAD, header_style=self.palette.heading)
        table.add_column("param", style=self.palette.value)
        table.add_column("metric", style=self.palette.value)
        table.add_column("value", justify="right")
        table.add_column("stderr", justify="right", style=self.palette.muted)
        table.add_column("tolerance", justify="right", style=self.palette.muted)
        table.add_column("rule", style=self.palette.muted)
        table.add_column("", justify="center")
        for row in report.rows:
            table.add_row(*self._metric_cells(row))
        title = f"{report.study} · seed {report.seed} · {report.runtime:.1f}s"
        self.console.print(self._panel(table, title, report.passed))
        for note in report.notes:
            self.console.print(Text(f"  note: {note}", style=self.palette.note))

    def show_summary(self, title: str, values: Mapping[str, Any]) -> None:
        """Two-column key/value table, e.g. a simulation run summary."""
        table = Table.grid(padding=(0, 2))
        table.add_column(style=self.palette.muted)
        table.add_column(style=self.palette.value, justify="right")
        for key, value in values.items():
            table.add_row(key, _number(value) if isinstance(value, float) else str(value))
        self.console.print(self._panel(table, title, None))

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _metric_cells(self, row: MetricRow) -> tuple[str | Text, ...]:
        return (
            row.param,
            row.metric,
            _number(row.value),
            _number(row.stderr),
            _number(row.tolerance),
            str(row.rule),
            self._verdict(row.verdict),
        )

    def _verdict(self, verdict: bool | None) -> Text:
        if verdict is None:
            return Text("·", style=self.palette.muted)
        if verdict:
            return Text("pass", style=f"bold {self.palette.passed}")
        return Text("FAIL", style=f"bold {self.palette.failed}")

    def _panel(self, body: Any, title: str, verdict: bool | None) -> Panel:
        p = self.palette
        border = p.frame if verdict is None else (p.passed if verdict else p.failed)
        return Panel(body, title=Text(title, style=p.heading), border_style=border, box=ROUNDED, expand=False)
