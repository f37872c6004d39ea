"""Desk-scale Monte Carlo studies of the limit theorems.

Each study sweeps one parameter, compares fixed-time marginals (or
occupation samples) against a reference law, and returns a
:class:`~catbp_engine.verify.report.StudyReport` whose verdicts follow
from the stored values and tolerances alone. Convergence trends are judged
on medians over independent study repeats.

Seeds: repeat ``r`` of a study with master seed ``s`` uses
``derive_seed(s, r)``; within a repeat each sweep point and reference
ensemble gets its own derived seed, so adding a sweep point never changes
the draws of another.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np

from catbp_core import (
    BranchingParams,
    DiffusionParams,
    FamilyError,
    InvalidHorizonError,
    InvalidRegimeError,
    Path,
    PathKind,
    Regime,
    StationaryLaw,
    TestFunction,
    averaged_coefficients,
    default_test_library,
    family_check,
    matched_branching_params,
    residual_table,
)

from ..model.branching import martingale_diagnostics, occupation_sampler, simulate_replications
from ..model.diffusion import (
    DEFAULT_DT,
    SdeGrid,
    averaged_moments,
    exponential_moment_samples,
    integrate_averaged_terminal,
    integrate_terminal,
)
from ..rng import LANE_STATIONARY, RngStream, derive_seed, run_replications
from .report import MetricRow, Rule, StudyReport
from .statistics import (
    EmpiricalSample,
    MomentEstimate,
    ergodic_average,
    ks_critical_value,
    ks_one_sample,
    ks_two_sample,
)

logger = logging.getLogger(__name__)

#: Engineering tolerances, recorded in every report row that uses them.
KS_TOLERANCE = 0.05
SE_TOLERANCE = 3.0
QV_TOLERANCE = 0.05
TREND_SLACK = 0.005
ERGODIC_TOLERANCE = 0.05
RESIDUAL_TOLERANCE = 1e-6
MUTATION_FLOOR = 1e-3
BATCH_SPREAD_TOLERANCE = 0.5
MOMENT_GROWTH_TOLERANCE = 1.1

#: Default limit constants; the matched family reproduces
#: ``{0: 0.3, 1: 0.45, 2: 0.25}`` for both species at ``n = 20``.
DEFAULT_LIMIT = DiffusionParams(c1=-1.0, c2=-1.0, alpha1=0.55, alpha2=0.55)

_FAMILY_RTOL = 1e-9


def _row(
    study: str,
    param: str,
    metric: str,
    value: float,
    stderr: float = math.nan,
    tolerance: float = math.nan,
    rule: Rule = Rule.RECORD,
) -> MetricRow:
    return MetricRow(study, param, metric, float(value), float(stderr), float(tolerance), rule)


def _median_and_se(values: Sequence[float]) -> tuple[float, float]:
    """Median over repeats and the standard error of their mean (NaN for one repeat)."""
    arr = np.asarray(values, dtype=np.float64)
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else math.nan
    return float(np.median(arr)), se


def _mean_gap(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Difference of two independent sample means and its combined standard error."""
    est_a, est_b = MomentEstimate.of(a), MomentEstimate.of(b)
    return est_a.mean - est_b.mean, math.hypot(est_a.mean_se, est_b.mean_se)


def _trend_rows(
    study: str, metric: str, labels: Sequence[str], medians: Sequence[float], repeats: int, slack: float
) -> list[MetricRow]:
    """One row holding the largest increase of the medians along the sweep."""
    if len(medians) < 2:
        return []
    increase = max(b - a for a, b in zip(medians, medians[1:]))
    rule = Rule.AT_MOST if repeats > 1 else Rule.RECORD
    return [_row(study, f"{labels[0]}..{labels[-1]}", f"{metric}_max_increase", increase, tolerance=slack, rule=rule)]


def check_family_matches(family: Sequence[BranchingParams], limit: DiffusionParams, rtol: float = _FAMILY_RTOL) -> None:
    """Raise unless every member's limit constants equal those of ``limit``.

    Raises:
        FamilyError: Naming the first member and constant that differ.
    """
    for params in family:
        for name in ("c1", "c2", "alpha1", "alpha2", "lambda1", "lambda2"):
            member, target = getattr(params, name), getattr(limit, name)
            if not math.isclose(member, target, rel_tol=rtol, abs_tol=rtol):
                raise FamilyError(
                    f"{name}={member!r} at n={params.n} differs from the limit value {target!r}",
                    context="parameter family",
                )


def _matched_family(limit: DiffusionParams, n_list: Sequence[int]) -> list[BranchingParams]:
    if not n_list:
        raise FamilyError("sweep over n is empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise FamilyError(f"sweep must increase strictly, got {list(n_list)}")
    family = [matched_branching_params(limit, n) for n in n_list]
    check_family_matches(family, limit)
    return family


# ---------------------------------------------------------------------------
# Diffusion limit
# ---------------------------------------------------------------------------


def study_diffusion_limit(
    n_list: Sequence[int],
    horizon: float,
    reps: int,
    seed: int,
    *,
    limit: DiffusionParams = DEFAULT_LIMIT,
    repeats: int = 1,
    dt: float = DEFAULT_DT,
    tolerance: float = KS_TOLERANCE,
    trend_slack: float = TREND_SLACK,
    se_tolerance: float = SE_TOLERANCE,
    epsilon: float = 0.5,
    threads: int | None = None,
) -> StudyReport:
    """Compare branching and diffusion marginals at ``horizon`` for each ``n``.

    For each ``n`` the matched branching model is simulated ``reps`` times
    and its ``(X̂_T, Ŷ_T)`` are compared by two-sample KS with ``reps``
    Euler–Maruyama draws of ``(X_T, Y_T)``. The largest ``n`` must give a
    catalyst KS below ``tolerance``; with several repeats the median KS
    must not increase along the sweep by more than ``trend_slack``. The
    Euler–Maruyama step is checked by rerunning the reference ensemble
    with ``dt/2``: the mean of ``X_T`` must move by at most
    ``se_tolerance`` combined standard errors.

    Raises:
        FamilyError: If the sweep is empty, not increasing, or the family
            constants do not match ``limit``.
    """
    study = "diffusion_limit"
    started = time.perf_counter()
    family = _matched_family(limit, n_list)
    tails = family_check(family, epsilon)
    grid = SdeGrid.covering(horizon, dt)
    labels = [f"n={n}" for n in n_list]

    ks_x: dict[int, list[float]] = {n: [] for n in n_list}
    ks_y: dict[int, list[float]] = {n: [] for n in n_list}
    below = 0
    halving: tuple[float, float] | None = None
    for r in range(repeats):
        repeat_seed = derive_seed(seed, r)
        sde = integrate_terminal(limit, grid, derive_seed(repeat_seed, 0), reps, threads)
        if r == 0:
            fine = integrate_terminal(limit, grid.refined(2), derive_seed(repeat_seed, 0, 2), reps, threads)
            halving = _mean_gap(fine.x, sde.x)
        sde_x, sde_y = EmpiricalSample.of(sde.x), EmpiricalSample.of(sde.y)
        for params in family:
            records = simulate_replications(params, horizon, None, derive_seed(repeat_seed, params.n), reps, threads)
            below += sum(rec.ledger.min_x < 1.0 for rec in records)
            bp_x = EmpiricalSample.of([rec.x_final for rec in records])
            bp_y = EmpiricalSample.of([rec.y_final for rec in records])
            ks_x[params.n].append(ks_two_sample(bp_x, sde_x))
            ks_y[params.n].append(ks_two_sample(bp_y, sde_y))
            logger.info(
                "%s repeat %d n=%d: KS(X)=%.4f KS(Y)=%.4f",
                study, r, params.n, ks_x[params.n][-1], ks_y[params.n][-1],
            )

    rows: list[MetricRow] = []
    medians_x, medians_y = [], []
    largest = n_list[-1]
    for n, label in zip(n_list, labels):
        med_x, se_x = _median_and_se(ks_x[n])
        med_y, se_y = _median_and_se(ks_y[n])
        medians_x.append(med_x)
        medians_y.append(med_y)
        rule = Rule.BELOW if n == largest else Rule.RECORD
        rows.append(_row(study, label, "ks_catalyst", med_x, se_x, tolerance, rule))
        rows.append(_row(study, label, "ks_reactant", med_y, se_y, tolerance, Rule.RECORD))
    rows += _trend_rows(study, "ks_catalyst", labels, medians_x, repeats, trend_slack)
    rows += _trend_rows(study, "ks_reactant", labels, medians_y, repeats, trend_slack)
    rows.append(_row(study, "all", "ks_noise_floor", ks_critical_value(reps) * math.sqrt(2.0)))
    rows.append(_row(study, "all", "catalyst_below_boundary", below, tolerance=0, rule=Rule.AT_MOST))
    if halving is not None:
        gap, gap_se = halving
        rows.append(_row(study, f"dt={grid.dt:g}", "sde_dt_halving_gap", gap, gap_se, se_tolerance, Rule.WITHIN_SE))

    report = StudyReport(
        study=study,
        sweep=tuple(n_list),
        rows=tuple(rows),
        seed=seed,
        runtime=time.perf_counter() - started,
        settings=_settings(limit, horizon=horizon, reps=reps, repeats=repeats, dt=grid.dt, steps=grid.steps),
        notes=tails.flags,
    )
    _log_verdict(report)
    return report


# ---------------------------------------------------------------------------
# Stationary convergence
# ---------------------------------------------------------------------------


def _lattice_cdf(law: StationaryLaw, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """``F(x + 1/2n)``: the lattice value ``k/n`` stands for the cell ``[k/n, (k+1)/n)``."""
    return lambda x: law.cdf(np.asarray(x) + 0.5 / n)


def _occupation_average(draws: np.ndarray, burn_in: float, gap: float) -> float:
    """Time average of the samples read as a step path from ``burn_in + gap`` on."""
    if draws.size < 2:
        return float(draws.mean())
    times = np.concatenate(([0.0], burn_in + gap * np.arange(1, draws.size + 1)))
    path = Path(times, np.concatenate((draws[:1], draws)), PathKind.CONSTANT)
    return ergodic_average(path, burn_in + gap)


def study_stationary(
    n_list: Sequence[int],
    count: int,
    seed: int,
    *,
    limit: DiffusionParams = DEFAULT_LIMIT,
    burn_in: float = 50.0,
    gap: float = 1.0,
    repeats: int = 1,
    tolerance: float = KS_TOLERANCE,
    trend_slack: float = TREND_SLACK,
    ergodic_tolerance: float = ERGODIC_TOLERANCE,
    moment_times: Sequence[float] = (1.0, 5.0, 25.0),
    moment_reps: int = 200,
    moment_delta: float = 0.1,
    moment_tolerance: float = MOMENT_GROWTH_TOLERANCE,
    threads: int | None = None,
) -> StudyReport:
    """One-sample KS of catalyst occupation samples against the stationary law.

    ``count`` samples are taken per ``n`` and repeat from one long
    trajectory (``burn_in + i·gap``) and compared with the law's CDF at the
    cell midpoints ``x + 1/2n``; their time average is compared with
    ``m_X``. A member whose catalyst law is ``δ₀`` stays pinned at 1; its
    row is reported without a verdict and left out of the trend. A sampler
    self-test row compares ``count`` exact draws with the law's own CDF at
    the 95% level.

    ``moment_reps`` diffusion paths estimate ``E[e^{δ X_t}]`` at each of
    ``moment_times``; the largest estimate may exceed the larger of
    ``e^{δ x0}`` and the stationary value by the factor
    ``moment_tolerance`` at most. ``moment_reps = 0`` skips these rows.

    Raises:
        ValidationError: If ``c1`` is not negative.
        FamilyError: For an empty or unordered sweep.
    """
    study = "stationary"
    started = time.perf_counter()
    limit.require_subcritical()
    family = _matched_family(limit, n_list)
    law = StationaryLaw.from_params(limit)
    labels = [f"n={n}" for n in n_list]

    tasks = [(r, params) for r in range(repeats) for params in family]

    def run(i: int) -> np.ndarray:
        r, params = tasks[i]
        rng = RngStream(derive_seed(seed, r, params.n), 0)
        return occupation_sampler(params, burn_in, gap, count, rng)

    samples = run_replications(run, len(tasks), threads)

    rows: list[MetricRow] = []
    notes: list[str] = []
    trend_labels, trend_medians = [], []
    largest = n_list[-1]
    for params, label in zip(family, labels):
        draws = [samples[i] for i, (_, p) in enumerate(tasks) if p.n == params.n]
        cdf = _lattice_cdf(law, params.n)
        distances = [ks_one_sample(EmpiricalSample.of(d), cdf) for d in draws]
        med, se = _median_and_se(distances)
        averages = [_occupation_average(d, burn_in, gap) for d in draws]
        relative_gap = abs(float(np.mean(averages)) / law.mean - 1.0)
        degenerate = params.mu1_zero == 1.0
        if degenerate:
            notes.append(f"{label}: catalyst law is delta_0, the chain stays at 1; KS is the CDF gap at 1 + 1/2n")
            rows.append(_row(study, label, "ks_occupation", med, se, tolerance, Rule.RECORD))
            rows.append(_row(study, label, "ergodic_relative_gap", relative_gap, tolerance=ergodic_tolerance))
            continue
        final = params.n == largest
        rows.append(_row(study, label, "ks_occupation", med, se, tolerance, Rule.BELOW if final else Rule.RECORD))
        rows.append(
            _row(
                study, label, "ergodic_relative_gap", relative_gap,
                tolerance=ergodic_tolerance, rule=Rule.BELOW if final else Rule.RECORD,
            )
        )
        trend_labels.append(label)
        trend_medians.append(med)
        logger.info("%s %s: KS=%.4f ergodic gap=%.4f", study, label, med, relative_gap)
    rows += _trend_rows(study, "ks_occupation", trend_labels, trend_medians, repeats, trend_slack)

    exact = law.sample_many(count, RngStream(seed, 0, LANE_STATIONARY).generator())
    rows.append(
        _row(
            study, "exact", "ks_sampler", ks_one_sample(EmpiricalSample.of(exact), law.cdf),
            tolerance=ks_critical_value(count), rule=Rule.BELOW,
        )
    )
    rows.append(_row(study, "exact", "mean_mX", law.mean))
    if moment_reps > 0:
        rows += _exponential_moment_rows(
            study, law, limit, moment_times, derive_seed(seed, repeats, 0), moment_reps,
            moment_delta, moment_tolerance, threads,
        )

    report = StudyReport(
        study=study,
        sweep=tuple(n_list),
        rows=tuple(rows),
        seed=seed,
        runtime=time.perf_counter() - started,
        settings=_settings(
            limit, count=count, burn_in=burn_in, gap=gap, repeats=repeats,
            moment_reps=moment_reps, moment_delta=moment_delta,
        ),
        notes=tuple(notes),
    )
    _log_verdict(report)
    return report


def _exponential_moment_rows(
    study: str,
    law: StationaryLaw,
    limit: DiffusionParams,
    times: Sequence[float],
    seed: int,
    reps: int,
    delta: float,
    tolerance: float,
    threads: int | None,
) -> list[MetricRow]:
    values = exponential_moment_samples(limit, times, seed, reps, threads, delta=delta)
    rows = []
    for t, column in zip(times, values.T):
        est = MomentEstimate.of(column)
        rows.append(_row(study, f"t={t:g}", "exp_moment", est.mean, est.mean_se))
    bound = math.exp(delta * limit.x0)
    if delta < law.beta:
        stationary = law.exponential_moment(delta)
        rows.append(_row(study, "exact", "exp_moment_stationary", stationary))
        bound = max(bound, stationary)
        rule = Rule.AT_MOST
    else:
        # no finite stationary moment to compare against
        rule = Rule.RECORD
    ratio = float(values.mean(axis=0).max()) / bound
    rows.append(_row(study, f"delta={delta:g}", "exp_moment_ratio", ratio, tolerance=tolerance, rule=rule))
    return rows


# ---------------------------------------------------------------------------
# Stochastic averaging
# ---------------------------------------------------------------------------


def study_averaging(
    a_n_list: Sequence[float],
    regime: Regime | str,
    t_eval: float,
    reps: int,
    seed: int,
    *,
    limit: DiffusionParams = DEFAULT_LIMIT,
    n: int = 50,
    dt: float = DEFAULT_DT,
    repeats: int = 1,
    tolerance: float = KS_TOLERANCE,
    se_tolerance: float = SE_TOLERANCE,
    threads: int | None = None,
) -> StudyReport:
    """Reactant marginals of the fast-catalyst system against the averaged SDE.

    For each ``a_n`` the fast system is simulated (reflected diffusion with
    step ``dt/a_n``, or the branching model at scale ``n``) up to
    ``t_eval``. Its reactant marginal is compared with an Euler–Maruyama
    ensemble of the averaged SDE by two-sample KS, and its mean and
    variance with the closed-form averaged moments. The catalyst is also
    time-averaged over the trailing window ``h = a_n^{-1/2}`` and compared
    with ``m_X``. Verdicts: the largest ``a_n`` has KS below ``tolerance``
    and moments within ``se_tolerance`` standard errors; the median KS at
    the largest ``a_n`` is below the one at the smallest.

    Raises:
        InvalidRegimeError: If ``regime`` is neither ``diffusion`` nor
            ``branching``.
        InvalidHorizonError: If ``t_eval`` is not positive.
        ValidationError: If ``c1`` is not negative.
    """
    try:
        regime = Regime(regime)
    except ValueError:
        raise InvalidRegimeError(regime, context="study_averaging") from None
    if not t_eval > 0:
        raise InvalidHorizonError(f"evaluation time must be positive, got {t_eval!r}")
    if not a_n_list:
        raise FamilyError("sweep over a_n is empty")
    limit.require_subcritical()
    study = f"averaging_{regime}"
    started = time.perf_counter()
    law = StationaryLaw.from_params(limit)
    b, a = averaged_coefficients(limit)
    mean_ref, var_ref = averaged_moments(b, a, limit.y0, t_eval)
    grid = SdeGrid.covering(t_eval, dt)
    labels = [f"a_n={a_n:g}" for a_n in a_n_list]

    ks: dict[float, list[float]] = {a_n: [] for a_n in a_n_list}
    marginals: dict[float, np.ndarray] = {}
    windows: dict[float, np.ndarray] = {}
    reference: np.ndarray | None = None
    for r in range(repeats):
        repeat_seed = derive_seed(seed, r)
        averaged = integrate_averaged_terminal(b, a, limit.y0, grid, derive_seed(repeat_seed, 0), reps, threads)
        avg_sample = EmpiricalSample.of(averaged.y)
        if r == 0:
            reference = averaged.y
        for index, a_n in enumerate(a_n_list, start=1):
            point_seed = derive_seed(repeat_seed, index)
            window = min(t_eval, 1.0 / math.sqrt(a_n))
            y, window_x = _fast_marginal(limit, regime, a_n, n, t_eval, dt, window, point_seed, reps, threads)
            ks[a_n].append(ks_two_sample(EmpiricalSample.of(y), avg_sample))
            if r == 0:
                marginals[a_n], windows[a_n] = y, window_x
            logger.info("%s repeat %d a_n=%g: KS=%.4f", study, r, a_n, ks[a_n][-1])

    rows: list[MetricRow] = []
    largest = a_n_list[-1]
    medians = []
    for a_n, label in zip(a_n_list, labels):
        final = a_n == largest
        med, se = _median_and_se(ks[a_n])
        medians.append(med)
        moments = MomentEstimate.of(marginals[a_n])
        within = Rule.WITHIN_SE if final else Rule.RECORD
        rows.append(_row(study, label, "ks_reactant", med, se, tolerance, Rule.BELOW if final else Rule.RECORD))
        rows.append(_row(study, label, "mean_deviation", moments.mean - mean_ref, moments.mean_se, se_tolerance, within))
        rows.append(
            _row(study, label, "variance_deviation", moments.variance - var_ref, moments.variance_se, se_tolerance, within)
        )
        catalyst = MomentEstimate.of(windows[a_n])
        rows.append(_row(study, label, "window_catalyst_mean", catalyst.mean, catalyst.mean_se))
    if len(a_n_list) >= 2:
        degenerate = limit.y0 == 0
        judged = repeats > 1 and not degenerate
        rows.append(
            _row(
                study, f"{labels[-1]} vs {labels[0]}", "ks_reactant_change", medians[-1] - medians[0],
                tolerance=0.0, rule=Rule.BELOW if judged else Rule.RECORD,
            )
        )
    ref_moments = MomentEstimate.of(reference)
    rows.append(
        _row(study, "averaged", "mean_deviation", ref_moments.mean - mean_ref, ref_moments.mean_se, se_tolerance, Rule.WITHIN_SE)
    )
    rows.append(_row(study, "averaged", "mean_closed_form", mean_ref))
    rows.append(_row(study, "averaged", "variance_closed_form", var_ref))
    rows.append(_row(study, "averaged", "mean_mX", law.mean))

    report = StudyReport(
        study=study,
        sweep=tuple(a_n_list),
        rows=tuple(rows),
        seed=seed,
        runtime=time.perf_counter() - started,
        settings=_settings(limit, regime=str(regime), t_eval=t_eval, reps=reps, repeats=repeats, dt=grid.dt, n=n, b=b, a=a),
        notes=("y0 = 0: every marginal is identically 0, no trend verdict",) if limit.y0 == 0 else (),
    )
    _log_verdict(report)
    return report


def _fast_marginal(
    limit: DiffusionParams,
    regime: Regime,
    a_n: float,
    n: int,
    t_eval: float,
    dt: float,
    window: float,
    seed: int,
    reps: int,
    threads: int | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Reactant values at ``t_eval`` and trailing-window catalyst means."""
    fast = limit.with_a_n(a_n)
    if regime is Regime.DIFFUSION:
        grid = SdeGrid.covering(t_eval, dt / a_n)
        ensemble = integrate_terminal(fast, grid, seed, reps, threads, window=window)
        return ensemble.y, ensemble.window_mean_x
    params = matched_branching_params(fast, n)
    records = simulate_replications(params, t_eval, None, seed, reps, threads, window=window)
    return (
        np.array([rec.y_final for rec in records]),
        np.array([rec.ledger.window_mean_x for rec in records]),
    )


# ---------------------------------------------------------------------------
# Stationarity criterion and martingale identities
# ---------------------------------------------------------------------------


def study_echeverria(
    law: StationaryLaw,
    library: Sequence[TestFunction] | None = None,
    lambda1: float = 1.0,
    *,
    tolerance: float = RESIDUAL_TOLERANCE,
    mutation_floor: float = MUTATION_FLOOR,
) -> StudyReport:
    """Generator-orthogonality residuals of ``law`` over a test-function library.

    Every residual must vanish to ``tolerance``. Replacing the boundary
    constant ``p(1)/2`` by ``p(1)`` must move the residual above
    ``mutation_floor`` for each function with ``φ′(1) ≠ 0``.
    """
    study = "echeverria"
    started = time.perf_counter()
    library = default_test_library() if library is None else tuple(library)
    rows: list[MetricRow] = []
    worst = 0.0
    for name, slope, residual, mutated in residual_table(law, library, lambda1):
        worst = max(worst, abs(residual))
        rows.append(_row(study, name, "abs_residual", abs(residual), tolerance=tolerance, rule=Rule.BELOW))
        rows.append(_row(study, name, "boundary_slope", slope))
        rows.append(
            _row(
                study, name, "abs_mutated_residual", abs(mutated),
                tolerance=mutation_floor, rule=Rule.ABOVE if slope != 0.0 else Rule.RECORD,
            )
        )
    rows.append(_row(study, "library", "max_abs_residual", worst, tolerance=tolerance, rule=Rule.BELOW))
    report = StudyReport(
        study=study,
        sweep=tuple(phi.name for phi in library),
        rows=tuple(rows),
        seed=0,
        runtime=time.perf_counter() - started,
        settings={"c1": law.c1, "alpha1": law.alpha1, "lambda1": lambda1},
    )
    _log_verdict(report)
    return report


def study_martingale(
    params: BranchingParams,
    horizon: float,
    reps: int,
    seed: int,
    *,
    batches: int = 10,
    se_tolerance: float = SE_TOLERANCE,
    qv_tolerance: float = QV_TOLERANCE,
    spread_tolerance: float = BATCH_SPREAD_TOLERANCE,
    threads: int | None = None,
) -> StudyReport:
    """Martingale and quadratic-variation identities over ``reps`` trajectories.

    Checks that the catalyst, reactant and shadow residuals have mean zero
    within ``se_tolerance`` standard errors, that the empirical variance of
    the catalyst residual matches the mean predictable quadratic variation
    to ``qv_tolerance`` relative, that the catalyst never fell below
    the boundary, and that ``E[sup X̂²]`` is stable across ``batches``
    replication batches.
    """
    study = "martingale"
    started = time.perf_counter()
    label = f"n={params.n}"
    records = simulate_replications(params, horizon, None, seed, reps, threads)
    diagnostics = np.array([martingale_diagnostics(rec, params) for rec in records])
    residual_x, qv_x, residual_y, qv_y, shadow = diagnostics.T

    rows: list[MetricRow] = []
    for metric, values in (("residual_x", residual_x), ("residual_y", residual_y), ("shadow_gap", shadow)):
        est = MomentEstimate.of(values)
        rows.append(_row(study, label, f"{metric}_mean", est.mean, est.mean_se, se_tolerance, Rule.WITHIN_SE))
    est_x = MomentEstimate.of(residual_x)
    if qv_x.mean() > 0:
        rows.append(
            _row(
                study, label, "qv_x_relative_gap", abs(est_x.variance / qv_x.mean() - 1.0),
                tolerance=qv_tolerance, rule=Rule.BELOW,
            )
        )
    else:
        # No catalyst noise: the residual itself must vanish.
        rows.append(_row(study, label, "residual_x_variance", est_x.variance, tolerance=0.0, rule=Rule.AT_MOST))
    est_y = MomentEstimate.of(residual_y)
    if qv_y.mean() > 0:
        rows.append(_row(study, label, "qv_y_relative_gap", abs(est_y.variance / qv_y.mean() - 1.0)))

    below = sum(rec.ledger.min_x < 1.0 for rec in records)
    rows.append(_row(study, label, "catalyst_below_boundary", below, tolerance=0, rule=Rule.AT_MOST))
    rows.append(_row(study, label, "mean_immigrations", np.mean([rec.ledger.immigrations for rec in records])))

    sup_sq = np.array([rec.ledger.max_x for rec in records]) ** 2
    batches = max(1, min(batches, reps))
    batch_means = np.array([chunk.mean() for chunk in np.array_split(sup_sq, batches)])
    overall = MomentEstimate.of(sup_sq)
    rows.append(_row(study, label, "sup_x_squared_mean", overall.mean, overall.mean_se))
    spread = float(batch_means.max() - batch_means.min()) / overall.mean
    rows.append(_row(study, label, "sup_x_squared_batch_spread", spread, tolerance=spread_tolerance, rule=Rule.BELOW))
    rows.append(_row(study, label, "mean_event_count", np.mean([rec.event_count for rec in records])))

    report = StudyReport(
        study=study,
        sweep=(params.n,),
        rows=tuple(rows),
        seed=seed,
        runtime=time.perf_counter() - started,
        settings={
            "n": params.n,
            "lambda1": params.lambda1,
            "lambda2": params.lambda2,
            "pmf1": params.pmf1.to_text(),
            "pmf2": params.pmf2.to_text(),
            "x0": params.x0,
            "y0": params.y0,
            "a_n": params.a_n,
            "horizon": horizon,
            "reps": reps,
            "batches": batches,
        },
    )
    _log_verdict(report)
    return report


def _settings(limit: DiffusionParams, **extra: Any) -> dict[str, Any]:
    return {
        "c1": limit.c1,
        "c2": limit.c2,
        "alpha1": limit.alpha1,
        "alpha2": limit.alpha2,
        "lambda1": limit.lambda1,
        "lambda2": limit.lambda2,
        "x0": limit.x0,
        "y0": limit.y0,
        **extra,
    }


def _log_verdict(report: StudyReport) -> None:
    failed = report.failures
    if failed:
        logger.info(
            "%s failed %d of %d verdicts: %s",
            report.study, len(failed), len(report.verdicts), ", ".join(f"{r.metric}@{r.param}" for r in failed),
        )
    else:
        logger.info("%s passed all %d verdicts", report.study, len(report.verdicts))
