"""Euler–Maruyama integration of the reflected catalyst / reactant diffusion.

One step from ``(X_k, Y_k)`` with independent standard normals ``ξ, ζ``::

    X* = X_k + a_n c1 λ1 X_k dt + sqrt(a_n α1 λ1 X_k) ξ sqrt(dt)
    X_{k+1} = max(X*, 1),            η_{k+1} = η_k + (X_{k+1} − X*)
    Y* = Y_k + c2 λ2 X_k Y_k dt + sqrt(α2 λ2 X_k Y_k) ζ sqrt(dt)
    Y_{k+1} = max(Y*, 0),            absorbed once Y reaches 0

The clamp is the one-step Skorohod map, so ``X`` equals the Skorohod map of
the unreflected driver ``ψ_{k+1} = ψ_k + (X* − X_k)`` at every node. Both
normals are drawn on every step, also after absorption and in zero-noise
mode, so the stream position is a function of the step index alone.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numba import njit

from catbp_core import DiffusionParams, DivergedStepError, InvalidHorizonError, Path, PathKind

from ..rng import LANE_AVERAGED, LANE_DIFFUSION, RngStream, run_replications

logger = logging.getLogger(__name__)

#: Step size used by acceptance runs unless a study overrides it.
DEFAULT_DT = 1e-3

_OK = -1


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _system_path(rng, drift1, var1, drift2, var2, x0, y0, dt, steps, noise, out_x, out_y, out_eta, out_psi):
    root_dt = math.sqrt(dt)
    x = x0
    y = y0
    eta = 0.0
    psi = x0
    absorbed = 0 if y0 == 0.0 else -1
    out_x[0] = x
    out_y[0] = y
    out_eta[0] = 0.0
    out_psi[0] = psi
    for k in range(steps):
        xi = rng.standard_normal() * noise
        zeta = rng.standard_normal() * noise
        x_star = x + drift1 * x * dt + math.sqrt(var1 * x) * xi * root_dt
        y_star = y + drift2 * x * y * dt + math.sqrt(var2 * x * max(y, 0.0)) * zeta * root_dt
        if not (math.isfinite(x_star) and math.isfinite(y_star)):
            return absorbed, k + 1
        psi += x_star - x
        x_next = max(x_star, 1.0)
        eta += x_next - x_star
        if absorbed < 0:
            y = max(y_star, 0.0)
            if y == 0.0:
                absorbed = k + 1
        x = x_next
        out_x[k + 1] = x
        out_y[k + 1] = y
        out_eta[k + 1] = eta
        out_psi[k + 1] = psi
    return absorbed, _OK


@njit(cache=True, nogil=True)
def _system_terminal(rng, drift1, var1, drift2, var2, x0, y0, dt, steps, window_steps):
    root_dt = math.sqrt(dt)
    x = x0
    y = y0
    eta = 0.0
    absorbed = y0 == 0.0
    window_sum = 0.0
    first_window_step = steps - window_steps
    for k in range(steps):
        xi = rng.standard_normal()
        zeta = rng.standard_normal()
        x_star = x + drift1 * x * dt + math.sqrt(var1 * x) * xi * root_dt
        y_star = y + drift2 * x * y * dt + math.sqrt(var2 * x * max(y, 0.0)) * zeta * root_dt
        if not (math.isfinite(x_star) and math.isfinite(y_star)):
            return x, y, eta, window_sum, k + 1
        x_next = max(x_star, 1.0)
        eta += x_next - x_star
        if not absorbed:
            y = max(y_star, 0.0)
            absorbed = y == 0.0
        if k >= first_window_step:
            window_sum += 0.5 * (x + x_next) * dt
        x = x_next
    return x, y, eta, window_sum, _OK


@njit(cache=True, nogil=True)
def _averaged_path(rng, b, a, y0, dt, steps, out_y):
    root_dt = math.sqrt(dt)
    y = y0
    absorbed = 0 if y0 == 0.0 else -1
    out_y[0] = y
    for k in range(steps):
        zeta = rng.standard_normal()
        y_star = y + b * y * dt + math.sqrt(a * max(y, 0.0)) * zeta * root_dt
        if not math.isfinite(y_star):
            return absorbed, k + 1
        if absorbed < 0:
            y = max(y_star, 0.0)
            if y == 0.0:
                absorbed = k + 1
        out_y[k + 1] = y
    return absorbed, _OK


@njit(cache=True, nogil=True)
def _averaged_terminal(rng, b, a, y0, dt, steps):
    root_dt = math.sqrt(dt)
    y = y0
    absorbed = y0 == 0.0
    for k in range(steps):
        zeta = rng.standard_normal()
        y_star = y + b * y * dt + math.sqrt(a * max(y, 0.0)) * zeta * root_dt
        if not math.isfinite(y_star):
            return y, k + 1
        if not absorbed:
            y = max(y_star, 0.0)
            absorbed = y == 0.0
    return y, _OK


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SdeGrid:
    """Uniform time grid ``t_k = k·dt``, ``k = 0..steps``.

    Raises:
        InvalidHorizonError: Unless ``dt > 0`` and ``steps >= 1``.
    """

    dt: float
    steps: int

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)) or self.steps < 1:
            raise InvalidHorizonError(f"need dt > 0 and steps >= 1, got dt={self.dt!r}, steps={self.steps!r}")

    @classmethod
    def covering(cls, horizon: float, dt: float = DEFAULT_DT) -> SdeGrid:
        """Grid of step ``dt`` whose last node is the nearest to ``horizon``."""
        if not horizon > 0:
            raise InvalidHorizonError(f"horizon must be positive, got {horizon!r}")
        return cls(dt, max(1, round(horizon / dt)))

    @property
    def horizon(self) -> float:
        return self.dt * self.steps

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1, dtype=np.float64)

    def refined(self, factor: float) -> SdeGrid:
        """Same horizon with the step divided by ``factor``."""
        return SdeGrid(self.dt / factor, max(1, round(self.steps * factor)))


@dataclass(frozen=True, slots=True, eq=False)
class ReflectedPathSample:
    """One discretized trajectory of the reflected system.

    Attributes:
        times: Grid times.
        x: Catalyst values, at least 1.
        y: Reactant values, nonnegative.
        eta: Reflection term, nondecreasing from 0.
        psi: Unreflected driver whose Skorohod map is ``x``.
        absorbed_at: First grid time with ``Y = 0``, or ``None``.
    """

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    eta: np.ndarray
    psi: np.ndarray
    absorbed_at: float | None

    def catalyst_path(self) -> Path:
        return Path(self.times, self.x, PathKind.LINEAR)

    def driver_path(self) -> Path:
        return Path(self.times, self.psi, PathKind.LINEAR)

    def reactant_path(self) -> Path:
        return Path(self.times, self.y, PathKind.LINEAR)


@dataclass(frozen=True, slots=True, eq=False)
class TerminalEnsemble:
    """Final-time marginals of a replicated run, in replication order.

    Attributes:
        x: Catalyst at the horizon (empty for averaged runs).
        y: Reactant (or averaged reactant) at the horizon.
        eta: Reflection term at the horizon (empty for averaged runs).
        window_mean_x: Trailing-window time average of the catalyst.
        dt: Step size used.
    """

    x: np.ndarray
    y: np.ndarray
    eta: np.ndarray
    window_mean_x: np.ndarray
    dt: float


def _coefficients(params: DiffusionParams) -> tuple[float, float, float, float]:
    a_n = params.a_n
    return (
        a_n * params.c1 * params.lambda1,
        a_n * params.alpha1 * params.lambda1,
        params.c2 * params.lambda2,
        params.alpha2 * params.lambda2,
    )


def _diverged(step: int, rng: RngStream, where: str) -> DivergedStepError:
    logger.warning("replication %d diverged at step %d (%s)", rng.replication_index, step, where)
    return DivergedStepError(step, rng.replication_index, context=where)


# ---------------------------------------------------------------------------
# Integrators
# ---------------------------------------------------------------------------


def integrate_system(
    params: DiffusionParams, grid: SdeGrid, rng: RngStream, *, noise: bool = True
) -> ReflectedPathSample:
    """Integrate the reflected system on ``grid``.

    ``a_n`` multiplies the catalyst drift and the catalyst diffusion
    variance; ``a_n = 1`` is the comparable-timescale system.

    Args:
        params: Diffusion constants and initial values.
        grid: Step size and step count.
        rng: Stream address.
        noise: ``False`` runs the zero-noise reflected ODE (the normals are
            still drawn and discarded).

    Raises:
        DivergedStepError: If a step produces a non-finite state.
    """
    drift1, var1, drift2, var2 = _coefficients(params)
    size = grid.steps + 1
    out_x, out_y, out_eta, out_psi = (np.empty(size, dtype=np.float64) for _ in range(4))
    absorbed, diverged = _system_path(
        rng.generator(), drift1, var1, drift2, var2, float(params.x0), float(params.y0),
        grid.dt, grid.steps, 1.0 if noise else 0.0, out_x, out_y, out_eta, out_psi,
    )
    if diverged != _OK:
        raise _diverged(diverged, rng, "integrate_system")
    for values in (out_x, out_y, out_eta, out_psi):
        values.setflags(write=False)
    return ReflectedPathSample(
        times=grid.times,
        x=out_x,
        y=out_y,
        eta=out_eta,
        psi=out_psi,
        absorbed_at=None if absorbed < 0 else absorbed * grid.dt,
    )


def integrate_terminal(
    params: DiffusionParams,
    grid: SdeGrid,
    master_seed: int,
    reps: int,
    threads: int | None = None,
    *,
    window: float = 0.0,
) -> TerminalEnsemble:
    """Final-time marginals over ``reps`` replications without storing paths.

    ``window`` is the length of the trailing window over which the catalyst
    time average is taken (trapezoidal); 0 disables it.
    """
    drift1, var1, drift2, var2 = _coefficients(params)
    window_steps = min(grid.steps, round(window / grid.dt)) if window > 0 else 0

    def one(i: int) -> tuple[float, float, float, float]:
        rng = RngStream(master_seed, i, LANE_DIFFUSION)
        x, y, eta, window_sum, diverged = _system_terminal(
            rng.generator(), drift1, var1, drift2, var2, float(params.x0), float(params.y0),
            grid.dt, grid.steps, window_steps,
        )
        if diverged != _OK:
            raise _diverged(diverged, rng, "integrate_terminal")
        mean = window_sum / (window_steps * grid.dt) if window_steps else math.nan
        return x, y, eta, mean

    logger.debug("integrating %d diffusion replications (a_n=%g, dt=%g)", reps, params.a_n, grid.dt)
    x, y, eta, window_mean = np.array(run_replications(one, reps, threads)).T
    return TerminalEnsemble(x=x, y=y, eta=eta, window_mean_x=window_mean, dt=grid.dt)


def exponential_moment_samples(
    params: DiffusionParams,
    times: Sequence[float],
    master_seed: int,
    reps: int,
    threads: int | None = None,
    *,
    delta: float = 0.1,
    dt: float = DEFAULT_DT,
) -> np.ndarray:
    """``e^{δ X_t}`` at each of ``times`` for ``reps`` catalyst trajectories.

    Returns:
        Array of shape ``(reps, len(times))``; row ``i`` comes from one
        path of replication ``i`` read off at the grid nodes nearest to
        ``times``.

    Raises:
        InvalidHorizonError: If ``times`` is empty or not positive.
    """
    if len(times) == 0 or min(times) <= 0:
        raise InvalidHorizonError(f"need positive sampling times, got {list(times)!r}")
    grid = SdeGrid.covering(max(times), dt)
    nodes = np.minimum(np.rint(np.asarray(times, dtype=np.float64) / grid.dt).astype(np.int64), grid.steps)

    def one(i: int) -> np.ndarray:
        path = integrate_system(params, grid, RngStream(master_seed, i, LANE_DIFFUSION))
        return np.exp(delta * path.x[nodes])

    return np.array(run_replications(one, reps, threads))


def integrate_averaged(b: float, a: float, y0: float, grid: SdeGrid, rng: RngStream) -> Path:
    """Euler–Maruyama path of ``dY̌ = b Y̌ dt + sqrt(a Y̌) dB``, absorbed at 0.

    Raises:
        ValueError: If ``a < 0`` or ``y0 < 0``.
        DivergedStepError: If a step produces a non-finite state.
    """
    if a < 0 or y0 < 0:
        raise ValueError(f"need a >= 0 and y0 >= 0, got a={a!r}, y0={y0!r}")
    out_y = np.empty(grid.steps + 1, dtype=np.float64)
    _, diverged = _averaged_path(rng.generator(), b, a, float(y0), grid.dt, grid.steps, out_y)
    if diverged != _OK:
        raise _diverged(diverged, rng, "integrate_averaged")
    return Path(grid.times, out_y, PathKind.LINEAR)


def integrate_averaged_terminal(
    b: float,
    a: float,
    y0: float,
    grid: SdeGrid,
    master_seed: int,
    reps: int,
    threads: int | None = None,
) -> TerminalEnsemble:
    """Final-time marginals of the averaged SDE over ``reps`` replications."""
    if a < 0 or y0 < 0:
        raise ValueError(f"need a >= 0 and y0 >= 0, got a={a!r}, y0={y0!r}")

    def one(i: int) -> float:
        rng = RngStream(master_seed, i, LANE_AVERAGED)
        y, diverged = _averaged_terminal(rng.generator(), b, a, float(y0), grid.dt, grid.steps)
        if diverged != _OK:
            raise _diverged(diverged, rng, "integrate_averaged_terminal")
        return y

    y = np.array(run_replications(one, reps, threads), dtype=np.float64)
    empty = np.empty(0)
    return TerminalEnsemble(x=empty, y=y, eta=empty, window_mean_x=empty, dt=grid.dt)


def averaged_moments(b: float, a: float, y0: float, t: float) -> tuple[float, float]:
    """Mean and variance of the averaged reactant at time ``t``.

    ``E Y̌_t = y0 e^{bt}`` and ``Var Y̌_t = a y0 e^{bt} (e^{bt} − 1) / b``,
    with limit ``a y0 t`` as ``b → 0``.
    """
    growth = math.exp(b * t)
    if b == 0.0:
        return y0, a * y0 * t
    return y0 * growth, a * y0 * growth * math.expm1(b * t) / b
