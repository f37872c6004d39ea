"""Output files: a ``#`` comment header followed by a CSV or JSON data section.

The header names the tool version, the config digest, the seed, the
timestamp (unless suppressed) and every effective config value. JSON output
carries the same fields under ``"header"``. Everything except the timestamp
and runtime is a function of (config, seed), so two runs with
``--no-timestamp`` write identical bytes.
"""

from __future__ import annotations

import io
import json
import math
import sys
from collections.abc import Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, TextIO

import numpy as np
import pandas as pd

from . import __version__
from .config import RunConfig, as_dict
from .model.branching import EVENT_CATALYST, BpPathRecord, EventLog
from .model.diffusion import ReflectedPathSample
from .verify.report import StudyReport


def header_lines(config: RunConfig, *, timestamp: bool = True) -> list[str]:
    """Comment lines, without trailing newlines."""
    lines = [f"# catbp {__version__}"]
    lines += [f"# config-sha256: {config.digest()}", f"# seed: {config.run.seed}"]
    if timestamp:
        lines.append(f"# timestamp: {_now()}")
    lines += [f"# {key} = {value}" for key, value in config.items()]
    return lines


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


def bp_frame(records: Sequence[BpPathRecord]) -> pd.DataFrame:
    """Grid records: ``rep, t, x, y, z, eta_hat``."""
    return pd.concat(
        [
            pd.DataFrame(
                {
                    "rep": rec.replication,
                    "t": rec.grid,
                    "x": rec.x,
                    "y": rec.y,
                    "z": rec.z,
                    "eta_hat": rec.eta_hat,
                }
            )
            for rec in records
        ],
        ignore_index=True,
    )


def event_frame(logs: Sequence[tuple[int, EventLog]]) -> pd.DataFrame:
    """Event logs: ``rep, time, event_type, k, x_int, y_int, z_int``."""
    frames = []
    for rep, log in logs:
        frames.append(
            pd.DataFrame(
                {
                    "rep": rep,
                    "time": log.time,
                    "event_type": np.where(log.kind == EVENT_CATALYST, "catalyst", "reactant"),
                    "k": log.k,
                    "x_int": log.x_int,
                    "y_int": log.y_int,
                    "z_int": log.z_int,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def sde_frame(samples: Sequence[ReflectedPathSample]) -> pd.DataFrame:
    """Reflected-diffusion paths: ``rep, t, X, Y, eta``."""
    return pd.concat(
        [
            pd.DataFrame({"rep": rep, "t": s.times, "X": s.x, "Y": s.y, "eta": s.eta})
            for rep, s in enumerate(samples)
        ],
        ignore_index=True,
    )


def averaged_frame(paths: Sequence[Any]) -> pd.DataFrame:
    """Averaged-SDE paths: ``rep, t, Y_avg``."""
    return pd.concat(
        [pd.DataFrame({"rep": rep, "t": p.times, "Y_avg": p.values}) for rep, p in enumerate(paths)],
        ignore_index=True,
    )


def stationary_frame(xs: np.ndarray, pdf: np.ndarray, cdf: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"x": xs, "pdf": pdf, "cdf": cdf})


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def render_frame(frame: pd.DataFrame, header: Sequence[str], fmt: str, *, columns: bool = True) -> str:
    """Header plus data section as one string.

    CSV floats use the shortest round-trip representation with ``.`` as the
    decimal separator. ``columns=False`` leaves out the CSV column-name line,
    so a one-column frame becomes one value per line.
    """
    if fmt == "json":
        document = {"header": _header_document(header), "data": _records(frame)}
        return json.dumps(document, indent=2, default=_json_default) + "\n"
    buffer = io.StringIO()
    for line in header:
        buffer.write(line + "\n")
    frame.to_csv(buffer, index=False, header=columns, lineterminator="\n")
    return buffer.getvalue()


def render_report(
    report: StudyReport, config: RunConfig, header: Sequence[str], fmt: str, *, runtime: bool = True
) -> str:
    """A study report in CSV (flat metric rows) or JSON (full document)."""
    if fmt == "json":
        body = report.to_json()
        if not runtime:
            body.pop("runtime")
        document = {"header": _header_document(header), "config": as_dict(config), "report": body}
        return json.dumps(document, indent=2, default=_json_default) + "\n"
    return render_frame(report.to_frame(), header, "csv")


def emit(text: str, out: str | Path | None, stream: TextIO | None = None) -> None:
    """Write to ``out``, or to ``stream`` (stdout by default) when ``out`` is empty."""
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    else:
        (stream or sys.stdout).write(text)


def _header_document(header: Sequence[str]) -> dict[str, str]:
    document = {}
    for line in header:
        body = line.removeprefix("# ")
        if " = " in body:
            key, value = body.split(" = ", 1)
        elif ": " in body:
            key, value = body.split(": ", 1)
        else:
            key, value = "tool", body
        document[key] = value
    return document


def _records(frame: pd.DataFrame) -> list[dict[str, Any]]:
    return [
        {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.items()}
        for row in frame.to_dict(orient="records")
    ]


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")
