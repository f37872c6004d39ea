"""Stationary law of the reflected catalyst diffusion.

For ``c1 < 0`` the catalyst diffusion reflected at 1 has the invariant
density

    p(x) = (θ / x) · exp(2 c1 x / α1),   x ≥ 1,

with ``θ`` the normalizing constant. Writing ``β = −2 c1 / α1`` and
substituting ``w = log(β x)`` turns every integral of ``p`` into an
integral of the entire function ``g(w) = exp(β − e^w)``:

    ∫₁^x p = (1/J) ∫_{log β}^{log βx} g(w) dw,   J = e^β E₁(β) = e^β / θ.

Working with ``J`` instead of ``θ`` keeps the numerics scale-free in ``β``.
The normalization uses adaptive Gauss–Kronrod quadrature (QUADPACK) up to an
explicit cutoff where the kernel has decayed by a factor 1e-18 relative to
its boundary value.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from .exceptions import InvalidLawError, UnboundedSupportError
from .params import DiffusionParams

#: ``-log(1e-18)``: decay of the kernel beyond which the tail is dropped.
TAIL_DECAY = 18.0 * math.log(10.0)

#: Relative tolerance requested from the adaptive quadrature.
QUAD_RTOL = 1e-12

#: Bisection tolerance on ``x`` for quantiles.
QUANTILE_XTOL = 1e-12

TABLE_CELLS = 1024

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _check_signs(c1: float, alpha1: float) -> float:
    if not (c1 < 0 and alpha1 > 0):
        raise InvalidLawError(c1, alpha1)
    return -2.0 * c1 / alpha1


def _kernel_integral(beta: float, lo: float, hi: float) -> tuple[float, float]:
    """``∫ exp(β − e^w) dw`` over ``[lo, hi]`` with its error estimate."""
    value, error = integrate.quad(
        lambda w: math.exp(beta - math.exp(w)), lo, hi, epsabs=0.0, epsrel=QUAD_RTOL, limit=200
    )
    return value, error


def _normalizer(beta: float) -> tuple[float, float]:
    """``J = e^β E₁(β)`` and its error budget (quadrature error + tail bound)."""
    w_lo = math.log(beta)
    w_hi = math.log(beta + TAIL_DECAY)
    value, error = _kernel_integral(beta, w_lo, w_hi)
    # ∫_{V}^∞ e^{-v}/(v+β) dv ≤ e^{-V}/(V+β)
    tail_bound = math.exp(-TAIL_DECAY) / (TAIL_DECAY + beta)
    return value, error + tail_bound


def theta(c1: float, alpha1: float) -> float:
    """Normalizing constant ``θ = (∫₁^∞ x⁻¹ exp(2 c1 x / α1) dx)⁻¹``.

    Raises:
        InvalidLawError: Unless ``c1 < 0`` and ``alpha1 > 0``.
    """
    beta = _check_signs(c1, alpha1)
    norm, _ = _normalizer(beta)
    return math.exp(beta) / norm


def mean_mX(c1: float, alpha1: float) -> float:
    """Stationary catalyst mean ``m_X = −(α1 θ / 2 c1) · exp(2 c1 / α1)``.

    The closed form simplifies to ``1 / (β J)``.

    Raises:
        InvalidLawError: Unless ``c1 < 0`` and ``alpha1 > 0``.
    """
    beta = _check_signs(c1, alpha1)
    norm, _ = _normalizer(beta)
    return 1.0 / (beta * norm)


def mean_mX_quadrature(c1: float, alpha1: float) -> float:
    """``∫₁^∞ x p(x) dx`` by direct adaptive quadrature (cross-check of :func:`mean_mX`)."""
    beta = _check_signs(c1, alpha1)
    norm, _ = _normalizer(beta)
    x_max = 1.0 + TAIL_DECAY / beta
    value, _ = integrate.quad(
        lambda x: math.exp(-beta * (x - 1.0)) / norm, 1.0, x_max, epsabs=0.0, epsrel=QUAD_RTOL, limit=200
    )
    return value


@dataclass(frozen=True, slots=True, eq=False)
class StationaryLaw:
    """The stationary law ``ν₁`` of the reflected catalyst diffusion.

    Built eagerly: the normalization and a cumulative table over
    :data:`TABLE_CELLS` cells in ``w = log(βx)`` are computed on
    construction, after which the object is read-only and safe for
    concurrent use.

    Attributes:
        c1: Catalyst drift constant, negative.
        alpha1: Catalyst spread constant, positive.
        beta: Exponential rate ``−2 c1 / α1``.
        norm: ``J = e^β / θ``.
        norm_error: Error budget of ``norm`` (quadrature estimate plus the
            analytic tail bound).
        x_max: Cutoff where ``exp(2 c1 x / α1)`` has decayed by 1e-18
            relative to its value at 1.

    Raises:
        InvalidLawError: Unless ``c1 < 0`` and ``alpha1 > 0``.
    """

    c1: float
    alpha1: float
    beta: float = field(init=False)
    norm: float = field(init=False)
    norm_error: float = field(init=False)
    x_max: float = field(init=False)
    _w_nodes: np.ndarray = field(init=False, repr=False)
    _cumulative: np.ndarray = field(init=False, repr=False)
    _tail: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        beta = _check_signs(self.c1, self.alpha1)
        norm, norm_error = _normalizer(beta)
        w_nodes = np.linspace(math.log(beta), math.log(beta + TAIL_DECAY), TABLE_CELLS + 1)
        cells = np.array([_kernel_integral(beta, a, b)[0] for a, b in zip(w_nodes[:-1], w_nodes[1:])])
        cumulative = np.concatenate(([0.0], np.cumsum(cells))) / norm
        # tail[i]: mass of the table from node i on, summed from the far end.
        tail = np.concatenate((np.cumsum(cells[::-1])[::-1], [0.0])) / norm
        for table in (w_nodes, cumulative, tail):
            table.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "norm", norm)
        object.__setattr__(self, "norm_error", norm_error)
        object.__setattr__(self, "x_max", 1.0 + TAIL_DECAY / beta)
        object.__setattr__(self, "_w_nodes", w_nodes)
        object.__setattr__(self, "_cumulative", cumulative)
        object.__setattr__(self, "_tail", tail)

    @classmethod
    def from_params(cls, params: DiffusionParams) -> StationaryLaw:
        return cls(params.c1, params.alpha1)

    @property
    def theta(self) -> float:
        return math.exp(self.beta) / self.norm

    @property
    def mean(self) -> float:
        """``m_X``, the stationary mean."""
        return 1.0 / (self.beta * self.norm)

    def exponential_moment(self, delta: float) -> float:
        """``E_ν[e^{δX}] = e^δ J(β − δ) / J(β)``, finite only for ``δ < β``.

        Raises:
            ValueError: If ``delta >= beta``.
        """
        if not delta < self.beta:
            raise ValueError(f"exponential moment of order {delta!r} diverges for beta={self.beta!r}")
        if delta == 0.0:
            return 1.0
        shifted, _ = _normalizer(self.beta - delta)
        return math.exp(delta) * shifted / self.norm

    def pdf(self, x: float | np.ndarray) -> np.ndarray:
        """Density, 0 below the boundary."""
        x = np.asarray(x, dtype=np.float64)
        safe = np.maximum(x, 1.0)
        out = np.exp(-self.beta * (safe - 1.0)) / (safe * self.norm)
        return np.where(x >= 1.0, out, 0.0)

    def _partial(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Gauss–Legendre ``∫ exp(β − e^w) dw`` over ``[lo, hi]`` inside one table cell."""
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        points = mid[..., None] + half[..., None] * _GL_NODES
        return (np.exp(self.beta - np.exp(points)) @ _GL_WEIGHTS) * half

    def _cell(self, w: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self._w_nodes, w, side="right") - 1, 0, TABLE_CELLS - 1)

    def _node_x(self, i: int) -> float:
        return max(1.0, math.exp(self._w_nodes[i]) / self.beta)

    def cdf(self, x: float | np.ndarray) -> np.ndarray:
        """Distribution function from the table plus Gauss–Legendre on the partial cell."""
        x = np.asarray(x, dtype=np.float64)
        nodes = self._w_nodes
        w = np.clip(np.log(self.beta * np.maximum(x, 1.0)), nodes[0], nodes[-1])
        idx = self._cell(w)
        out = self._cumulative[idx] + self._partial(nodes[idx], w) / self.norm
        return np.where(x >= 1.0, np.clip(out, 0.0, 1.0), 0.0)

    def sf(self, x: float | np.ndarray) -> np.ndarray:
        """Survival function ``1 − cdf``, accurate to relative precision far into the tail.

        Inside the table it adds the mass right of ``x`` in its cell to the
        tail table; beyond ``x_max`` it integrates the kernel directly.
        """
        x = np.asarray(x, dtype=np.float64)
        nodes = self._w_nodes
        w = np.log(self.beta * np.maximum(x, 1.0))
        inside = np.minimum(w, nodes[-1])
        idx = self._cell(inside)
        out = self._tail[idx + 1] + self._partial(inside, nodes[idx + 1]) / self.norm
        beyond = w > nodes[-1]
        if np.any(beyond):
            out = np.array(out, dtype=np.float64, ndmin=1)
            far = np.broadcast_to(w, out.shape)
            for i in np.flatnonzero(beyond.ravel()):
                lo = float(far.flat[i])
                value, _ = _kernel_integral(self.beta, lo, math.log(math.exp(lo) + TAIL_DECAY))
                out.flat[i] = value / self.norm
            out = out.reshape(x.shape)
        return np.where(x >= 1.0, np.clip(out, 0.0, 1.0), 1.0)

    def quantile(self, q: float) -> float:
        """Inverse of :meth:`cdf` by bisection inside the bracketing table cell.

        Levels above one half are inverted on the survival side through
        :meth:`isf`. A level ``q = cdf(x)`` carries an absolute rounding of
        about 1e-16, so ``quantile(cdf(x))`` recovers ``x`` only to about
        ``1e-16 / pdf(x)``: for ``c1 = −1, α1 = 1`` that stays below 1e-8 for
        ``x ≤ 8``. Use ``isf(sf(x))`` further out. ``q = 1`` maps to ``x_max``.
        """
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile level must lie in [0, 1], got {q!r}")
        if q <= 0.0:
            return 1.0
        if q > 0.5:
            return self.isf(1.0 - q)
        cell = int(np.searchsorted(self._cumulative, q, side="right")) - 1
        # One neighbouring cell on each side absorbs table/partial-cell rounding.
        lo = self._node_x(max(cell - 1, 0))
        hi = min(self.x_max, self._node_x(min(cell + 2, TABLE_CELLS)))

        def gap(x: float) -> float:
            return float(self.cdf(x)) - q

        if gap(hi) <= 0.0:
            return hi
        if gap(lo) >= 0.0:
            return lo
        return optimize.bisect(gap, lo, hi, xtol=QUANTILE_XTOL, rtol=4 * np.finfo(float).eps)

    def isf(self, s: float) -> float:
        """Inverse of :meth:`sf`: the ``x`` with survival probability ``s``.

        ``isf(sf(x))`` recovers ``x`` to 1e-8 wherever ``sf(x)`` is a normal
        float, beyond ``x_max`` included. ``s = 0`` maps to ``x_max``.
        """
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"survival level must lie in [0, 1], got {s!r}")
        if s >= 1.0:
            return 1.0
        if s <= 0.0:
            return self.x_max
        # Largest node whose tail mass is still at least s.
        cell = int(np.searchsorted(-self._tail, -s, side="right")) - 1
        lo = self._node_x(max(cell - 1, 0))
        if cell + 2 <= TABLE_CELLS:
            hi = self._node_x(cell + 2)
        else:
            hi = self.x_max
            while float(self.sf(hi)) > s:
                hi = 1.0 + 2.0 * (hi - 1.0)

        def gap(x: float) -> float:
            return float(self.sf(x)) - s

        if gap(lo) <= 0.0:
            return lo
        if gap(hi) >= 0.0:
            return hi
        return optimize.bisect(gap, lo, hi, xtol=QUANTILE_XTOL, rtol=4 * np.finfo(float).eps)

    def acceptance_probability(self, x: float) -> float:
        """Rejection-sampler acceptance for proposal value ``x`` (tight at 1)."""
        return 1.0 / x

    def sample(self, rng: np.random.Generator) -> float:
        """One exact draw by rejection from ``1 + Exponential(β)``.

        ``p(x) ∝ e^{−βx}/x ≤ e^{−βx}`` on ``[1, ∞)``, so a proposal is kept
        with probability ``1/x``.
        """
        while True:
            x = 1.0 + rng.exponential(1.0 / self.beta)
            if rng.random() * x < 1.0:
                return x

    def sample_many(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` independent exact draws, in batches."""
        out = np.empty(count, dtype=np.float64)
        filled = 0
        while filled < count:
            batch = max(64, int(1.5 * (count - filled)))
            x = 1.0 + rng.exponential(1.0 / self.beta, size=batch)
            kept = x[rng.random(batch) * x < 1.0][: count - filled]
            out[filled : filled + kept.size] = kept
            filled += kept.size
        return out

    def table(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(x, pdf, cdf)`` columns on a grid."""
        xs = np.asarray(xs, dtype=np.float64)
        return xs, self.pdf(xs), self.cdf(xs)


def sample(law: StationaryLaw, rng: np.random.Generator) -> float:
    """Exact draw from ``law``; see :meth:`StationaryLaw.sample`."""
    return law.sample(rng)


def averaged_coefficients(params: DiffusionParams) -> tuple[float, float]:
    """Drift and variance coefficients ``(b, a)`` of the averaged reactant.

    ``b = c2 λ2 m_X`` and ``a = α2 λ2 m_X``.
    """
    m = mean_mX(params.c1, params.alpha1)
    return params.c2 * params.lambda2 * m, params.alpha2 * params.lambda2 * m


# ----------------------------------------------------------------------
# Test functions for the stationarity criterion
# ----------------------------------------------------------------------

#: Continuity tolerance at knots (relative to the local scale).
KNOT_TOLERANCE = 1e-9


@dataclass(frozen=True, slots=True, eq=False)
class TestFunction:
    """C¹ piecewise polynomial on ``[1, R]``, identically zero beyond ``R``.

    Attributes:
        knots: Increasing breakpoints ``1 = k₀ < … < k_m = R``.
        pieces: ``m`` polynomials, ``pieces[i]`` living on
            ``[knots[i], knots[i+1]]``.
        name: Label used in reports.

    Raises:
        UnboundedSupportError: If ``R`` is not finite or the function (or its
            derivative) does not vanish at ``R``.
        ValueError: If knots and pieces disagree or the function is not C¹.
    """

    __test__ = False  # not a pytest class

    knots: tuple[float, ...]
    pieces: tuple[Polynomial, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if len(self.knots) != len(self.pieces) + 1 or not self.pieces:
            raise ValueError("need one more knot than pieces")
        if self.knots[0] != 1.0:
            raise ValueError(f"support must start at 1, got {self.knots[0]!r}")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("knots must be strictly increasing")
        radius = self.knots[-1]
        if not math.isfinite(radius):
            raise UnboundedSupportError("test function support is unbounded", context=self.name)
        derivs = [p.deriv() for p in self.pieces]
        for i in range(1, len(self.pieces)):
            k = self.knots[i]
            for left, right in ((self.pieces[i - 1], self.pieces[i]), (derivs[i - 1], derivs[i])):
                scale = max(1.0, abs(left(k)))
                if abs(left(k) - right(k)) > KNOT_TOLERANCE * scale:
                    raise ValueError(f"{self.name or 'test function'} is not C1 at knot {k!r}")
        last, dlast = self.pieces[-1], derivs[-1]
        scale = max(1.0, float(np.max(np.abs(last.coef))))
        if abs(last(radius)) > KNOT_TOLERANCE * scale or abs(dlast(radius)) > KNOT_TOLERANCE * scale:
            raise UnboundedSupportError(
                f"value/derivative at R={radius!r} do not vanish", context=self.name
            )

    @property
    def radius(self) -> float:
        return self.knots[-1]

    def _evaluate(self, x: np.ndarray, order: int) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for i, piece in enumerate(self.pieces):
            lo, hi = self.knots[i], self.knots[i + 1]
            mask = (x >= lo) & ((x < hi) if i < len(self.pieces) - 1 else (x <= hi))
            out[mask] = piece.deriv(order)(x[mask]) if order else piece(x[mask])
        return out

    def value(self, x: np.ndarray) -> np.ndarray:
        return self._evaluate(x, 0)

    def first(self, x: np.ndarray) -> np.ndarray:
        return self._evaluate(x, 1)

    def second(self, x: np.ndarray) -> np.ndarray:
        return self._evaluate(x, 2)

    @property
    def slope_at_boundary(self) -> float:
        """``φ′(1)``, which multiplies the boundary term."""
        return float(self.pieces[0].deriv()(1.0))


def _hermite(a: float, b: float, fa: float, da: float, fb: float, db: float) -> Polynomial:
    """Cubic on ``[a, b]`` with prescribed values and slopes at both ends."""
    h = b - a
    s = Polynomial([-a / h, 1.0 / h])
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return fa * h00 + h * da * h10 + fb * h01 + h * db * h11


def _root_power(root: float, power: int) -> Polynomial:
    return Polynomial([-root, 1.0]) ** power


def default_test_library() -> tuple[TestFunction, ...]:
    """Ten C¹ test functions, seven of them with ``φ′(1) ≠ 0``."""
    one = Polynomial([1.0])
    return (
        TestFunction((1.0, 4.0), (_root_power(1.0, 2) * _root_power(4.0, 2),), "(x-1)^2 (x-4)^2"),
        TestFunction((1.0, 4.0), (_root_power(4.0, 4),), "(x-4)^4"),
        TestFunction((1.0, 3.0), (_root_power(3.0, 2),), "(x-3)^2"),
        TestFunction((1.0, 5.0), (_root_power(5.0, 3),), "(x-5)^3"),
        TestFunction((1.0, 6.0), (_root_power(1.0, 1) * _root_power(6.0, 2),), "(x-1) (x-6)^2"),
        TestFunction((1.0, 2.0), (_root_power(2.0, 2),), "(x-2)^2"),
        TestFunction(
            (1.0, 2.0, 4.0),
            (_root_power(3.0, 2), _hermite(2.0, 4.0, 1.0, -2.0, 0.0, 0.0)),
            "(x-3)^2 then Hermite roll-off",
        ),
        TestFunction(
            (1.0, 2.5, 5.0),
            (one, _hermite(2.5, 5.0, 1.0, 0.0, 0.0, 0.0)),
            "plateau then Hermite roll-off",
        ),
        TestFunction((1.0, 5.0), (_root_power(1.0, 3) * _root_power(5.0, 2),), "(x-1)^3 (x-5)^2"),
        TestFunction((1.0, 6.0), (_root_power(6.0, 4),), "(x-6)^4"),
    )


def echeverria_residual(
    law: StationaryLaw,
    phi: TestFunction,
    lambda1: float,
    boundary_constant: float | None = None,
) -> float:
    """Generator-orthogonality residual of ``law`` against ``phi``.

    ``∫₁^R [c1 λ1 x φ′ + ½ α1 λ1 x φ″] p dx + C α1 λ1 φ′(1)`` with
    ``C = p(1)/2`` unless ``boundary_constant`` overrides it. Quadrature is
    split at the knots of ``phi``. For the true stationary law and the true
    boundary constant the residual vanishes for every test function.

    Raises:
        UnboundedSupportError: If ``phi`` has no finite support radius.
    """
    if not math.isfinite(phi.radius):
        raise UnboundedSupportError("test function support is unbounded", context=phi.name)
    c1, alpha1, beta, norm = law.c1, law.alpha1, law.beta, law.norm

    total = 0.0
    for lo, hi, piece in zip(phi.knots, phi.knots[1:], phi.pieces):
        d1, d2 = piece.deriv(), piece.deriv(2)

        def integrand(x: float, d1: Polynomial = d1, d2: Polynomial = d2) -> float:
            # x · p(x) = exp(−β(x−1)) / J
            weight = math.exp(-beta * (x - 1.0)) / norm
            return lambda1 * (c1 * d1(x) + 0.5 * alpha1 * d2(x)) * weight

        value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=QUAD_RTOL, limit=200)
        total += value
    constant = 0.5 * float(law.pdf(1.0)) if boundary_constant is None else boundary_constant
    return total + constant * alpha1 * lambda1 * phi.slope_at_boundary


def residual_table(
    law: StationaryLaw, library: Sequence[TestFunction], lambda1: float
) -> list[tuple[str, float, float, float]]:
    """``(name, φ′(1), residual, residual with C = p(1))`` for each function."""
    mutated = float(law.pdf(1.0))
    return [
        (
            phi.name,
            phi.slope_at_boundary,
            echeverria_residual(law, phi, lambda1),
            echeverria_residual(law, phi, lambda1, boundary_constant=mutated),
        )
        for phi in library
    ]
