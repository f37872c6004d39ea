"""``catbp`` CLI entry point.

Parses the command line, loads the run config, dispatches to the
simulators and studies, and writes data to ``--out`` (or stdout) with a
reproducibility header. Human summaries go to stderr through
:mod:`catbp_engine.view.rich_view`.

Exit codes: 0 success, 1 invalid input (validation, config, usage), 2
runtime failure (overflow, divergence), 3 a study verdict failed.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import io
import logging
import sys
from collections.abc import Callable, Sequence
from typing import NoReturn, TextIO

import numpy as np
import pandas as pd
from rich.console import Console
from rich.logging import RichHandler

from catbp_core import (
    CatbpError,
    ConfigError,
    StationaryLaw,
    ValidationError,
    averaged_coefficients,
    check_conditions,
    family_check,
)

from . import config as config_module
from .config import RunConfig, load_config
from .io import (
    averaged_frame,
    bp_frame,
    emit,
    event_frame,
    header_lines,
    render_frame,
    render_report,
    sde_frame,
    stationary_frame,
)
from .model.branching import simulate_replications
from .model.diffusion import SdeGrid, integrate_averaged, integrate_system
from .rng import LANE_AVERAGED, LANE_DIFFUSION, LANE_STATIONARY, RngStream, run_replications
from .verify.report import StudyReport
from .verify.studies import (
    study_averaging,
    study_diffusion_limit,
    study_echeverria,
    study_martingale,
    study_stationary,
)
from .view.rich_view import ReportView

logger = logging.getLogger("catbp_engine")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2
EXIT_VERDICT = 3


class _Parser(argparse.ArgumentParser):
    """Usage errors print the config schema and map to exit code 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\nconfig schema:\n{_schema_help()}\n")
        raise SystemExit(EXIT_INVALID)


def _schema_help() -> str:
    doc = config_module.__doc__ or ""
    start = doc.find("Schema")
    return doc[start:].strip() if start >= 0 else doc.strip()


class Run:
    """Per-invocation state handed to every command handler."""

    def __init__(self, args: argparse.Namespace, config: RunConfig, view: ReportView) -> None:
        self.args = args
        self.config = config
        self.view = view

    @property
    def seed(self) -> int:
        return self.config.run.seed

    def header(self) -> list[str]:
        return header_lines(self.config, timestamp=not self.args.no_timestamp)

    def write(self, frame: pd.DataFrame, *, columns: bool = True) -> None:
        emit(render_frame(frame, self.header(), self.config.io.format, columns=columns), self.config.io.out)

    def write_report(self, report: StudyReport) -> int:
        text = render_report(
            report, self.config, self.header(), self.config.io.format, runtime=not self.args.no_timestamp
        )
        emit(text, self.config.io.out)
        self.view.show_study(report)
        return EXIT_OK if report.passed else EXIT_VERDICT


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------


def _params_check(run: Run) -> int:
    params = run.config.model.branching()
    report = check_conditions(params)
    run.view.show_validation(report, title=f"Parameter check (n={params.n})")
    run.write(
        pd.DataFrame(
            {
                "condition": [c.name for c in report.checks],
                "passed": [c.passed for c in report.checks],
                "detail": [c.detail for c in report.checks],
            }
        )
    )
    if not report.passed:
        raise ValidationError(report.failures, context="params check")
    return EXIT_OK


def _params_family(run: Run) -> int:
    model, study = run.config.model, run.config.study
    epsilon = run.args.epsilon if run.args.epsilon is not None else study.epsilon
    report = family_check([model.branching(n) for n in study.n_list], epsilon)
    run.view.show_family(report)
    run.write(pd.DataFrame([dataclasses.asdict(row) for row in report.rows]))
    return EXIT_OK


def _simulate_bp(run: Run) -> int:
    cfg = run.config
    params = cfg.model.branching()
    grid = np.linspace(0.0, cfg.sim.horizon, cfg.sim.grid_points)
    records = simulate_replications(
        params, cfg.sim.horizon, grid, run.seed, cfg.sim.reps, cfg.threads,
        window=cfg.sim.window, record_events=bool(cfg.io.events),
    )
    run.write(bp_frame(records))
    if cfg.io.events:
        events = event_frame([(rec.replication, rec.events) for rec in records])
        emit(render_frame(events, run.header(), "csv"), cfg.io.events)
    run.view.show_summary(
        f"simulate bp (n={params.n})",
        {
            "replications": len(records),
            "mean X_T": float(np.mean([r.x_final for r in records])),
            "mean Y_T": float(np.mean([r.y_final for r in records])),
            "mean events": float(np.mean([r.event_count for r in records])),
        },
    )
    return EXIT_OK


def _simulate_sde(run: Run) -> int:
    cfg = run.config
    limit = cfg.model.limit()
    grid = SdeGrid.covering(cfg.sim.horizon, cfg.sim.dt)
    samples = run_replications(
        lambda i: integrate_system(limit, grid, RngStream(run.seed, i, LANE_DIFFUSION), noise=cfg.sim.noise),
        cfg.sim.reps,
        cfg.threads,
    )
    run.write(sde_frame(samples))
    run.view.show_summary(
        "simulate sde",
        {
            "replications": len(samples),
            "dt": grid.dt,
            "mean X_T": float(np.mean([s.x[-1] for s in samples])),
            "absorbed": sum(s.absorbed_at is not None for s in samples),
        },
    )
    return EXIT_OK


def _simulate_averaged(run: Run) -> int:
    cfg = run.config
    limit = cfg.model.limit().require_subcritical()
    b, a = averaged_coefficients(limit)
    grid = SdeGrid.covering(cfg.sim.horizon, cfg.sim.dt)
    paths = run_replications(
        lambda i: integrate_averaged(b, a, limit.y0, grid, RngStream(run.seed, i, LANE_AVERAGED)),
        cfg.sim.reps,
        cfg.threads,
    )
    run.write(averaged_frame(paths))
    run.view.show_summary("simulate averaged", {"b": b, "a": a, "replications": len(paths)})
    return EXIT_OK


def _stationary_table(run: Run) -> int:
    cfg = run.config
    law = StationaryLaw.from_params(cfg.model.limit())
    xs = np.linspace(1.0, cfg.io.table_max, cfg.io.table_points)
    run.write(stationary_frame(*law.table(xs)))
    run.view.show_summary("stationary law", {"theta": law.theta, "m_X": law.mean, "x_max": law.x_max})
    return EXIT_OK


def _stationary_sample(run: Run) -> int:
    cfg = run.config
    law = StationaryLaw.from_params(cfg.model.limit())
    draws = law.sample_many(cfg.sim.count, RngStream(run.seed, 0, LANE_STATIONARY).generator())
    run.write(pd.DataFrame({"x": draws}), columns=False)
    return EXIT_OK


def _verify_limit(run: Run) -> int:
    cfg = run.config
    report = study_diffusion_limit(
        cfg.study.n_list, cfg.sim.horizon, cfg.study.reps, run.seed,
        limit=cfg.model.limit(), repeats=cfg.study.repeats, dt=cfg.sim.dt,
        tolerance=cfg.study.ks_tolerance, trend_slack=cfg.study.trend_slack,
        se_tolerance=cfg.study.se_tolerance, epsilon=cfg.study.epsilon, threads=cfg.threads,
    )
    return run.write_report(report)


def _verify_stationary(run: Run) -> int:
    cfg = run.config
    report = study_stationary(
        cfg.study.n_list, cfg.sim.count, run.seed,
        limit=cfg.model.limit(), burn_in=cfg.sim.burn_in, gap=cfg.sim.gap,
        repeats=cfg.study.repeats, tolerance=cfg.study.ks_tolerance,
        trend_slack=cfg.study.trend_slack, threads=cfg.threads,
    )
    return run.write_report(report)


def _verify_averaging(run: Run) -> int:
    cfg = run.config
    regime = run.args.regime or cfg.study.regime
    report = study_averaging(
        cfg.study.a_n_list, regime, cfg.study.t_eval, cfg.study.reps, run.seed,
        limit=cfg.model.limit(), n=cfg.model.n, dt=cfg.sim.dt, repeats=cfg.study.repeats,
        tolerance=cfg.study.ks_tolerance, se_tolerance=cfg.study.se_tolerance, threads=cfg.threads,
    )
    return run.write_report(report)


def _verify_echeverria(run: Run) -> int:
    limit = run.config.model.limit()
    report = study_echeverria(StationaryLaw.from_params(limit), None, limit.lambda1)
    return run.write_report(report)


def _verify_martingale(run: Run) -> int:
    cfg = run.config
    report = study_martingale(
        cfg.model.branching(), cfg.sim.horizon, cfg.study.reps, run.seed,
        batches=cfg.study.batches, se_tolerance=cfg.study.se_tolerance,
        qv_tolerance=cfg.study.qv_tolerance, threads=cfg.threads,
    )
    return run.write_report(report)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run config (see docs/config.md)")
    common.add_argument("--seed", type=int, help="64-bit master seed")
    common.add_argument("--reps", type=int, help="replication count (simulations and studies)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp and runtime")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="catbp", description="Catalyst–reactant branching simulations and limit-theorem checks.")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(group: argparse._SubParsersAction, name: str, handler: Callable[[Run], int], help: str):
        sub = group.add_parser(name, parents=[common], help=help)
        sub.set_defaults(handler=handler)
        return sub

    params = groups.add_parser("params", help="check model parameters").add_subparsers(dest="action", required=True)
    leaf(params, "check", _params_check, "standing conditions of one parameterization")
    family = leaf(params, "family", _params_family, "tail and constant trajectories over n_list")
    family.add_argument("--epsilon", type=float, help="tail threshold factor")

    simulate = groups.add_parser("simulate", help="simulate paths").add_subparsers(dest="action", required=True)
    bp = leaf(simulate, "bp", _simulate_bp, "exact branching simulation")
    bp.add_argument("--events", help="also write the full event log to this CSV")
    leaf(simulate, "sde", _simulate_sde, "reflected diffusion (Euler–Maruyama)")
    leaf(simulate, "averaged", _simulate_averaged, "averaged one-dimensional SDE")

    stationary = groups.add_parser("stationary", help="stationary law").add_subparsers(dest="action", required=True)
    leaf(stationary, "table", _stationary_table, "x, pdf, cdf on a grid")
    leaf(stationary, "sample", _stationary_sample, "exact draws, one per line")

    verify = groups.add_parser("verify", help="verification studies").add_subparsers(dest="action", required=True)
    leaf(verify, "limit", _verify_limit, "diffusion limit")
    leaf(verify, "stationary", _verify_stationary, "stationary convergence")
    averaging = leaf(verify, "averaging", _verify_averaging, "stochastic averaging")
    averaging.add_argument("--regime", choices=("diffusion", "branching"), help="fast system to simulate")
    leaf(verify, "echeverria", _verify_echeverria, "generator orthogonality of the stationary law")
    leaf(verify, "martingale", _verify_martingale, "martingale and quadratic-variation identities")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def dispatch(argv: Sequence[str]) -> int:
    """Run one command and return its exit code."""
    argv = list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    configure_logging(args.verbose, args.quiet)
    try:
        config = load_config(args.config).override(
            seed=args.seed,
            reps=args.reps,
            out=args.out,
            format=args.format,
            threads=args.threads,
            events=getattr(args, "events", None),
        )
        return args.handler(Run(args, config, ReportView()))
    except (ValidationError, ConfigError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    except ValueError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_INVALID
    except (CatbpError, RuntimeError, OSError) as exc:
        logger.error("run failed: %s", exc)
        return EXIT_RUNTIME


def _utf8_streams(*streams: TextIO) -> None:
    """Switch text streams to UTF-8; the headers and tables carry ``·``, ``–`` and Greek names."""
    for stream in streams:
        if isinstance(stream, io.TextIOWrapper) and stream.encoding.lower().replace("-", "") != "utf8":
            with contextlib.suppress(ValueError, OSError):
                stream.reconfigure(encoding="utf-8", errors="backslashreplace")


def main() -> None:
    """Entry point registered as the ``catbp`` console script."""
    _utf8_streams(sys.stdout, sys.stderr)
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
