"""Exact event-driven simulation of the scaled catalyst–reactant–shadow triple.

State lives on the integer lattice: ``x_int = n·X̂``, ``y_int = n·Ŷ`` and
``z_int = n·Ẑ``. At state ``(x_int, y_int)`` the catalyst fires at total rate
``a_n·λ1·n·x_int`` and the reactant at ``λ2·x_int·y_int``. A catalyst event
with ``k`` offspring moves the shadow by ``k − 1`` and the catalyst to
``max(n, x_int + k − 1)``: the catalyst is replenished to ``n`` instead of
dropping below it. A reactant event moves ``y_int`` by ``k − 1``; at
``y_int = 0`` the reactant rate vanishes and the reactant is absorbed.

The reflection functional is ``η̂ = a_n·λ1·n·μ1(0)·(time spent at x_int = n)``.

The inner loop is a numba kernel that draws from the numpy ``Generator`` it
is handed, in a fixed order per event: waiting time, event type, offspring.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from numba import njit

from catbp_core import (
    AliasTable,
    BranchingParams,
    InvalidHorizonError,
    MissingEventLogError,
    Path,
    PathKind,
    PopulationOverflowError,
    ValidationError,
    check_conditions,
)

from ..rng import RngStream, run_replications

logger = logging.getLogger(__name__)

#: Largest lattice count a simulation may reach.
COUNT_LIMIT = 2**62

#: Conditions a parameterization must meet to be simulated at all. The
#: spread conditions are left out so degenerate laws (e.g. a point mass at 1)
#: can still be run.
_SIMULABLE = frozenset(
    {"lambda1_positive", "lambda2_positive", "x0_at_least_one", "y0_nonnegative", "a_n_at_least_one"}
)

EVENT_CATALYST = 0
EVENT_REACTANT = 1


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _alias_draw(u, prob, alias):
    scaled = u * prob.size
    column = int(scaled)
    if column >= prob.size:
        column = prob.size - 1
    if scaled - column < prob[column]:
        return column
    return alias[column]


@njit(cache=True, nogil=True)
def _bp_kernel(
    rng,
    n,
    cat_rate,
    lam2,
    prob1,
    alias1,
    prob2,
    alias2,
    x,
    y,
    z,
    horizon,
    grid,
    window_start,
    out_x,
    out_y,
    out_z,
    out_boundary,
    log_time,
    log_kind,
    log_k,
    log_x,
    log_y,
    log_z,
):
    t = 0.0
    g = 0
    events = 0
    logged = 0
    capacity = log_time.size
    max_x = x
    min_x = x
    int_x = 0.0
    int_xy = 0.0
    boundary = 0.0
    window_x = 0.0
    immigrations = 0
    status = 0
    while True:
        r1 = cat_rate * x
        r2 = lam2 * float(x) * float(y)
        total = r1 + r2
        t_next = t + rng.standard_exponential() / total
        # Right-continuous samples: the state held on [t, t_next).
        while g < grid.size and grid[g] < t_next:
            out_x[g] = x
            out_y[g] = y
            out_z[g] = z
            out_boundary[g] = boundary + (grid[g] - t if x == n else 0.0)
            g += 1
        t_end = min(t_next, horizon)
        span = t_end - t
        int_x += x * span
        int_xy += float(x) * float(y) * span
        if x == n:
            boundary += span
        lo = max(t, window_start)
        if t_end > lo:
            window_x += x * (t_end - lo)
        if t_next >= horizon:
            t = horizon
            break
        t = t_next

        if rng.random() * total < r1:
            kind = EVENT_CATALYST
            k = _alias_draw(rng.random(), prob1, alias1)
            z += k - 1
            raw = x + k - 1
            if raw < n:
                immigrations += 1
                raw = n
            x = raw
        else:
            kind = EVENT_REACTANT
            k = _alias_draw(rng.random(), prob2, alias2)
            y += k - 1
        events += 1
        if x > max_x:
            max_x = x
        if x < min_x:
            min_x = x
        if logged < capacity:
            log_time[logged] = t
            log_kind[logged] = kind
            log_k[logged] = k
            log_x[logged] = x
            log_y[logged] = y
            log_z[logged] = z
            logged += 1
        if x > COUNT_LIMIT or y > COUNT_LIMIT or z > COUNT_LIMIT or z < -COUNT_LIMIT:
            status = 1
            break
    while g < grid.size:
        out_x[g] = x
        out_y[g] = y
        out_z[g] = z
        out_boundary[g] = boundary
        g += 1
    return status, t, x, y, z, events, logged, max_x, min_x, int_x, int_xy, boundary, window_x, immigrations


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, slots=True)
class LatticeState:
    """Integer-lattice state at the end of a run.

    Attributes:
        x_int: Catalyst count ``n·X̂``, never below ``n``.
        y_int: Reactant count ``n·Ŷ``.
        z_int: Shadow count ``n·Ẑ`` (unreflected catalyst jumps), any sign.
        clock: Scaled time.
        boundary_time: Lebesgue time spent with ``x_int == n``.
    """

    x_int: int
    y_int: int
    z_int: int
    clock: float
    boundary_time: float


@dataclass(frozen=True, slots=True)
class EventLedger:
    """Exact path functionals accumulated event by event (scaled units).

    Attributes:
        int_x: ``∫₀ᵀ X̂ ds``.
        int_xy: ``∫₀ᵀ X̂ Ŷ ds``.
        boundary_time: ``∫₀ᵀ 1{X̂ = 1} ds``.
        window: Length of the trailing window ending at ``T``.
        window_int_x: ``∫ X̂ ds`` over the trailing window.
        max_x: ``sup_{t ≤ T} X̂_t``.
        min_x: ``inf_{t ≤ T} X̂_t``; at least 1 under controlled immigration.
        event_count: Number of jumps.
        immigrations: Catalyst events whose offspring count would have taken
            ``x_int`` below ``n`` and were replenished to ``n`` instead.
    """

    int_x: float
    int_xy: float
    boundary_time: float
    window: float
    window_int_x: float
    max_x: float
    min_x: float
    event_count: int
    immigrations: int

    @property
    def window_mean_x(self) -> float:
        """Time average of ``X̂`` over the trailing window (``nan`` for an empty window)."""
        return self.window_int_x / self.window if self.window > 0 else float("nan")


@dataclass(frozen=True, slots=True, eq=False)
class EventLog:
    """Every jump of one run, in time order (lattice counts after the jump)."""

    time: np.ndarray
    kind: np.ndarray
    k: np.ndarray
    x_int: np.ndarray
    y_int: np.ndarray
    z_int: np.ndarray

    def __len__(self) -> int:
        return self.time.size

    def catalyst_integral(self, x0_count: int, n: int, horizon: float) -> float:
        """``∫₀ᵀ X̂ ds`` recomputed from the log alone."""
        starts = np.concatenate(([0.0], self.time))
        ends = np.concatenate((self.time, [horizon]))
        held = np.concatenate(([x0_count], self.x_int)).astype(np.float64)
        return float(np.sum(held * (ends - starts))) / n


@dataclass(frozen=True, slots=True, eq=False)
class BpPathRecord:
    """Grid samples of one branching trajectory plus its exact ledger.

    Attributes:
        grid: Sampling times.
        x: ``X̂`` at the grid times (right-continuous).
        y: ``Ŷ`` at the grid times.
        z: ``Ẑ`` at the grid times.
        eta_hat: Reflection functional at the grid times.
        n: Lattice scale.
        final: Lattice state at the horizon.
        ledger: Exact path functionals, or ``None`` when not kept.
        events: Full event log, when requested.
        replication: Replication index of the stream that produced it.
    """

    grid: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    eta_hat: np.ndarray
    n: int
    final: LatticeState
    ledger: EventLedger | None = None
    events: EventLog | None = None
    replication: int = 0

    @property
    def horizon(self) -> float:
        return self.final.clock

    @property
    def event_count(self) -> int:
        if self.ledger is None:
            raise MissingEventLogError(context=f"replication {self.replication}")
        return self.ledger.event_count

    @property
    def x_final(self) -> float:
        return self.final.x_int / self.n

    @property
    def y_final(self) -> float:
        return self.final.y_int / self.n

    @property
    def z_final(self) -> float:
        return self.final.z_int / self.n

    def path(self, which: str = "x") -> Path:
        """One coordinate as a piecewise-constant :class:`Path` (grid must start at 0)."""
        return Path(self.grid, getattr(self, which), PathKind.CONSTANT)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def _require_simulable(params: BranchingParams) -> None:
    failures = [c for c in check_conditions(params).checks if c.name in _SIMULABLE and not c.passed]
    if failures:
        raise ValidationError(failures, context=f"simulate (n={params.n})")


def _check_grid(grid: np.ndarray | None, horizon: float) -> np.ndarray:
    if not horizon > 0 or not np.isfinite(horizon):
        raise InvalidHorizonError(f"horizon must be positive and finite, got {horizon!r}")
    if grid is None:
        return np.array([0.0, horizon])
    grid = np.array(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidHorizonError("sampling grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > horizon:
        raise InvalidHorizonError(f"sampling grid must increase strictly inside [0, {horizon!r}]")
    return grid


def reflection_rate(params: BranchingParams) -> float:
    """``a_n·λ1·n·μ1(0)``: growth rate of ``η̂`` while the catalyst sits at the boundary."""
    return params.a_n * params.lambda1 * params.n * params.mu1_zero


def simulate_pair(
    params: BranchingParams,
    horizon: float,
    grid: np.ndarray | None,
    rng: RngStream,
    *,
    record_events: bool = False,
    window: float = 0.0,
    keep_ledger: bool = True,
) -> BpPathRecord:
    """Simulate one trajectory of the scaled triple up to ``horizon``.

    Args:
        params: Model at lattice scale ``n``; ``a_n > 1`` accelerates the
            catalyst block.
        horizon: Final scaled time, positive.
        grid: Strictly increasing sampling times in ``[0, horizon]``;
            defaults to ``[0, horizon]``.
        rng: Stream address; identical addresses give identical records.
        record_events: Keep the full event log.
        window: Length of the trailing window for the catalyst time average.
        keep_ledger: Attach the exact :class:`EventLedger`.

    Raises:
        ValidationError: If the rates, initial counts or ``a_n`` are invalid.
        InvalidHorizonError: For a non-positive horizon or a malformed grid.
        PopulationOverflowError: If a count leaves ``[-2**62, 2**62]``.
    """
    _require_simulable(params)
    grid = _check_grid(grid, horizon)
    n = params.n
    table1 = AliasTable.build(params.pmf1)
    table2 = AliasTable.build(params.pmf2)
    cat_rate = params.a_n * params.lambda1 * n
    window_start = horizon - window if window > 0 else horizon

    capacity = 0
    if record_events:
        initial_rate = cat_rate * params.x0_count + params.lambda2 * params.x0_count * params.y0_count
        capacity = int(1.5 * initial_rate * horizon) + 1024

    while True:
        out_x = np.empty(grid.size, dtype=np.int64)
        out_y = np.empty(grid.size, dtype=np.int64)
        out_z = np.empty(grid.size, dtype=np.int64)
        out_b = np.empty(grid.size, dtype=np.float64)
        log_time = np.empty(capacity, dtype=np.float64)
        log_kind = np.empty(capacity, dtype=np.int8)
        log_k, log_x, log_y, log_z = (np.empty(capacity, dtype=np.int64) for _ in range(4))
        (
            status, clock, x, y, z, events, logged, max_x, min_x,
            int_x, int_xy, boundary, window_x, immigrations,
        ) = _bp_kernel(
            rng.generator(), n, cat_rate, params.lambda2,
            table1.prob, table1.alias, table2.prob, table2.alias,
            params.x0_count, params.y0_count, params.x0_count,
            float(horizon), grid, float(window_start),
            out_x, out_y, out_z, out_b,
            log_time, log_kind, log_k, log_x, log_y, log_z,
        )
        if status == 1:
            logger.warning("replication %d overflowed at t=%.6g (n=%d)", rng.replication_index, clock, n)
            raise PopulationOverflowError(clock, rng.replication_index, context="simulate_pair")
        if not record_events or logged == events:
            break
        # Same stream, same events: size the log exactly and run again.
        logger.debug(
            "event log of replication %d held %d of %d events; rerunning",
            rng.replication_index, logged, events,
        )
        capacity = events

    ledger = None
    if keep_ledger:
        ledger = EventLedger(
            int_x=int_x / n,
            int_xy=int_xy / (n * n),
            boundary_time=boundary,
            window=horizon - window_start,
            window_int_x=window_x / n,
            max_x=max_x / n,
            min_x=min_x / n,
            event_count=int(events),
            immigrations=int(immigrations),
        )
    log = None
    if record_events:
        log = EventLog(
            *(_frozen(a[:logged]) for a in (log_time, log_kind, log_k, log_x, log_y, log_z))
        )
    return BpPathRecord(
        grid=_frozen(grid),
        x=_frozen(out_x / n),
        y=_frozen(out_y / n),
        z=_frozen(out_z / n),
        eta_hat=_frozen(reflection_rate(params) * out_b),
        n=n,
        final=LatticeState(int(x), int(y), int(z), float(clock), float(boundary)),
        ledger=ledger,
        events=log,
        replication=rng.replication_index,
    )


def simulate_replications(
    params: BranchingParams,
    horizon: float,
    grid: np.ndarray | None,
    master_seed: int,
    reps: int,
    threads: int | None = None,
    *,
    window: float = 0.0,
    record_events: bool = False,
) -> list[BpPathRecord]:
    """``reps`` independent trajectories, ordered by replication index."""
    logger.debug("simulating %d branching replications (n=%d, T=%g)", reps, params.n, horizon)
    return run_replications(
        lambda i: simulate_pair(
            params, horizon, grid, RngStream(master_seed, i), window=window, record_events=record_events
        ),
        reps,
        threads,
    )


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


class MartingaleDiagnostics(NamedTuple):
    """Martingale residuals of one trajectory and their predictable quadratic variations."""

    residual_x: float
    qv_rhs: float
    residual_y: float
    qv_y: float
    shadow_gap: float


def martingale_diagnostics(record: BpPathRecord, params: BranchingParams) -> MartingaleDiagnostics:
    """Evaluate the martingale decompositions of ``X̂`` and ``Ŷ`` at the horizon.

    ``residual_x = X̂_T − x̂₀ − a_n c1 λ1 ∫X̂ − η̂_T`` with predictable quadratic
    variation ``a_n λ1 (α1 ∫X̂ − μ1(0) ∫1{X̂=1})``;
    ``residual_y = Ŷ_T − ŷ₀ − c2 λ2 ∫X̂Ŷ`` with ``λ2 α2 ∫X̂Ŷ``; and the shadow
    gap ``X̂_T − Ẑ_T − η̂_T``. All three residuals have mean zero.

    Raises:
        MissingEventLogError: If the record carries no exact ledger.
    """
    ledger = record.ledger
    if ledger is None:
        raise MissingEventLogError(context="martingale_diagnostics")
    eta_final = reflection_rate(params) * ledger.boundary_time
    fast = params.a_n * params.lambda1
    residual_x = record.x_final - params.x0 - fast * params.c1 * ledger.int_x - eta_final
    qv_rhs = fast * (params.alpha1 * ledger.int_x - params.mu1_zero * ledger.boundary_time)
    residual_y = record.y_final - params.y0 - params.c2 * params.lambda2 * ledger.int_xy
    qv_y = params.lambda2 * params.alpha2 * ledger.int_xy
    shadow_gap = record.x_final - record.z_final - eta_final
    return MartingaleDiagnostics(residual_x, qv_rhs, residual_y, qv_y, shadow_gap)


def occupation_sampler(
    params: BranchingParams,
    burn_in: float,
    gap: float,
    count: int,
    rng: RngStream,
) -> np.ndarray:
    """Catalyst values along one long trajectory, approximating draws from its stationary law.

    The reactant is switched off (``y0 = 0``) so only the catalyst evolves.
    Samples are taken at ``burn_in + i·gap`` for ``i = 1..count``.

    Raises:
        InvalidHorizonError: If ``burn_in`` or ``gap`` is not positive, or
            ``count < 1``.
        PopulationOverflowError: If the catalyst count leaves the safe range.
    """
    if not burn_in > 0 or not gap > 0 or count < 1:
        raise InvalidHorizonError(
            f"need burn_in > 0, gap > 0 and count >= 1, got {burn_in!r}, {gap!r}, {count!r}"
        )
    catalyst_only = replace(params, y0_count=0)
    grid = burn_in + gap * np.arange(1, count + 1, dtype=np.float64)
    record = simulate_pair(catalyst_only, float(grid[-1]), grid, rng, keep_ledger=False)
    return np.array(record.x)
