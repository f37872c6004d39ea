"""Run configuration: a sectioned INI file read into frozen dataclasses.

Schema (every key optional; unknown sections or keys are rejected)::

    [run]    seed, threads
    [model]  n, lambda1, lambda2, pmf1, pmf2, c1, c2, alpha1, alpha2, x0, y0, a_n
    [sim]    horizon, dt, grid_points, reps, burn_in, gap, count, window, noise
    [study]  n_list, a_n_list, regime, t_eval, reps, repeats, ks_tolerance,
             se_tolerance, qv_tolerance, trend_slack, epsilon, batches
    [io]     format, out, events, table_max, table_points

Lists (``pmf1``, ``n_list``, …) are whitespace separated. ``pmf1`` and ``pmf2``
also accept the ``k:p`` notation, e.g. ``0:0.3, 1:0.45, 2:0.25``; counts left
out get mass 0. An empty ``pmf1`` or ``pmf2`` selects the near-critical
three-point law matching ``c``/``alpha`` at scale ``n``.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, get_type_hints

from catbp_core import (
    BranchingParams,
    ConfigError,
    DiffusionParams,
    OffspringPmf,
    Regime,
    matched_branching_params,
)


@dataclass(frozen=True, slots=True)
class RunSection:
    seed: int = 1
    threads: int = 0


@dataclass(frozen=True, slots=True)
class ModelSection:
    """Model constants.

    ``c1, c2, alpha1, alpha2`` are the limit constants. When ``pmf1`` and
    ``pmf2`` are both given the branching model uses them verbatim and the
    limit constants are read off the pmfs instead.
    """

    n: int = 50
    lambda1: float = 1.0
    lambda2: float = 1.0
    pmf1: tuple[float, ...] = ()
    pmf2: tuple[float, ...] = ()
    c1: float = -1.0
    c2: float = -1.0
    alpha1: float = 0.55
    alpha2: float = 0.55
    x0: float = 1.0
    y0: float = 1.0
    a_n: float = 1.0

    def branching(self, n: int | None = None) -> BranchingParams:
        """The branching model at scale ``n`` (default: the configured one)."""
        n = self.n if n is None else n
        if self.pmf1 and self.pmf2:
            return BranchingParams.from_masses(
                n=n,
                lambda1=self.lambda1,
                lambda2=self.lambda2,
                pmf1=OffspringPmf(self.pmf1),
                pmf2=OffspringPmf(self.pmf2),
                x0=self.x0,
                y0=self.y0,
                a_n=self.a_n,
            )
        if self.pmf1 or self.pmf2:
            raise ConfigError("give both pmf1 and pmf2, or neither", context="[model]")
        return matched_branching_params(self.limit(), n)

    def limit(self) -> DiffusionParams:
        """Diffusion constants; from the explicit pmfs when they are given."""
        if self.pmf1 and self.pmf2:
            return DiffusionParams.from_branching(self.branching())
        return DiffusionParams(
            c1=self.c1,
            c2=self.c2,
            alpha1=self.alpha1,
            alpha2=self.alpha2,
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            x0=self.x0,
            y0=self.y0,
            a_n=self.a_n,
        )


@dataclass(frozen=True, slots=True)
class SimSection:
    horizon: float = 1.0
    dt: float = 1e-3
    grid_points: int = 101
    reps: int = 1
    burn_in: float = 50.0
    gap: float = 1.0
    count: int = 10_000
    window: float = 0.0
    noise: bool = True


@dataclass(frozen=True, slots=True)
class StudySection:
    n_list: tuple[int, ...] = (25, 50, 100)
    a_n_list: tuple[float, ...] = (1.0, 4.0, 16.0, 64.0)
    regime: Regime = Regime.DIFFUSION
    t_eval: float = 1.0
    reps: int = 10_000
    repeats: int = 1
    ks_tolerance: float = 0.05
    se_tolerance: float = 3.0
    qv_tolerance: float = 0.05
    trend_slack: float = 0.005
    epsilon: float = 0.5
    batches: int = 10


@dataclass(frozen=True, slots=True)
class IoSection:
    format: str = "csv"
    out: str = ""
    events: str = ""
    table_max: float = 20.0
    table_points: int = 200

    def __post_init__(self) -> None:
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}", context="[io]")


_SECTIONS = {
    "run": RunSection,
    "model": ModelSection,
    "sim": SimSection,
    "study": StudySection,
    "io": IoSection,
}


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Effective configuration of one command run."""

    run: RunSection = RunSection()
    model: ModelSection = ModelSection()
    sim: SimSection = SimSection()
    study: StudySection = StudySection()
    io: IoSection = IoSection()

    def override(self, **flags: Any) -> RunConfig:
        """Apply command-line flags; ``None`` values leave the file value alone.

        Recognized: ``seed``, ``threads``, ``reps`` (both simulation and
        study replications), ``out``, ``format``, ``events``.
        """
        config = self
        if flags.get("seed") is not None:
            config = replace(config, run=replace(config.run, seed=_check_seed(flags["seed"])))
        if flags.get("threads") is not None:
            config = replace(config, run=replace(config.run, threads=int(flags["threads"])))
        if flags.get("reps") is not None:
            reps = int(flags["reps"])
            config = replace(
                config,
                sim=replace(config.sim, reps=reps),
                study=replace(config.study, reps=reps),
            )
        io_flags = {key: flags[key] for key in ("out", "format", "events") if flags.get(key) is not None}
        if io_flags:
            config = replace(config, io=replace(config.io, **io_flags))
        return config

    def items(self) -> list[tuple[str, str]]:
        """Canonical ``("section.key", "value")`` pairs in schema order."""
        pairs = []
        for name in _SECTIONS:
            section = getattr(self, name)
            for f in fields(section):
                pairs.append((f"{name}.{f.name}", _format_value(getattr(section, f.name))))
        return pairs

    def digest(self) -> str:
        """SHA-256 of the canonical effective configuration."""
        text = "\n".join(f"{key} = {value}" for key, value in self.items())
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    @property
    def threads(self) -> int | None:
        return self.run.threads or None


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read a config file; ``None`` gives the built-in defaults.

    Raises:
        ConfigError: If the file is unreadable, malformed, or has an unknown
            section, an unknown key, or a value of the wrong type.
    """
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__unused__")
    parser.optionxform = str  # keys are case-sensitive
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], context=source) from exc

    sections: dict[str, Any] = {}
    for name in parser.sections():
        cls = _SECTIONS.get(name)
        if cls is None:
            raise ConfigError(f"unknown section [{name}]; expected one of {sorted(_SECTIONS)}", context=source)
        hints = get_type_hints(cls)
        known = {f.name for f in fields(cls)}
        values = {}
        for key, raw in parser.items(name):
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{name}]; expected one of {sorted(known)}", context=source)
            values[key] = _parse_value(raw, hints[key], f"{name}.{key}", source)
        try:
            sections[name] = cls(**values)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{name}]: {exc}", context=source) from exc
    return RunConfig(**sections)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


_PMF_KEYS = ("model.pmf1", "model.pmf2")


def _parse_value(raw: str, hint: Any, key: str, source: str) -> Any:
    raw = raw.strip()
    try:
        if hint is bool:
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if hint is int:
            return _check_seed(int(raw)) if key == "run.seed" else int(raw)
        if hint is float:
            return float(raw)
        if hint is Regime:
            return Regime(raw)
        if key in _PMF_KEYS and ":" in raw:
            return OffspringPmf.parse(raw).probs
        if hint == tuple[float, ...]:
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
        if hint == tuple[int, ...]:
            return tuple(int(tok) for tok in raw.replace(",", " ").split())
        return raw
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}", context=source) from exc


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(_format_value(v) for v in value)
    return str(value)


def as_dict(config: RunConfig) -> dict[str, dict[str, Any]]:
    """Nested plain-data form for JSON headers."""
    return {name: dataclasses.asdict(getattr(config, name)) for name in _SECTIONS}
