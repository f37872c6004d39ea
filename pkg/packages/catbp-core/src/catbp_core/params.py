"""Model parameterizations and their standing conditions.

:class:`BranchingParams` describes one member of the scaled
catalyst–reactant branching family (lattice scale ``n``), and
:class:`DiffusionParams` its diffusion limit. Both are frozen value
objects, safe to share read-only across worker threads.

Per-``n`` conditions are checked by :func:`check_conditions` /
:func:`validate`. The convergence requirements on a *sequence* of
parameterizations can only be judged on a family, which is what
:func:`family_check` reports on; it never enforces them.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

from .exceptions import ConditionCheck, FamilyError, ValidationError
from .offspring import OffspringPmf, near_critical_pmf, offspring_mgf, offspring_moments

#: Lattice tolerance when converting scaled masses to particle counts.
LATTICE_TOLERANCE = 1e-9

#: Exponent at which the bounded-mgf witness is quoted.
DEFAULT_MGF_DELTA = 1.0


def _to_count(mass: float, n: int, name: str) -> int:
    count = round(mass * n)
    if abs(count - mass * n) > LATTICE_TOLERANCE * max(1.0, abs(mass * n)):
        raise ValidationError(
            [ConditionCheck(f"{name}_on_lattice", False, f"{name}={mass!r} is not a multiple of 1/{n}")]
        )
    return count


@dataclass(frozen=True, slots=True)
class BranchingParams:
    """One scaled catalyst–reactant branching model at lattice scale ``n``.

    Initial masses are stored as integer particle counts so the state stays
    exactly on the lattice ``{l/n}``. Construction only checks structure;
    the standing conditions are reported by :func:`check_conditions`.

    Attributes:
        n: Lattice scale; one particle has mass ``1/n``.
        lambda1: Catalyst per-particle event rate.
        lambda2: Reactant per-particle event rate.
        pmf1: Catalyst offspring law.
        pmf2: Reactant offspring law.
        x0_count: Initial catalyst particle count ``n·x0``.
        y0_count: Initial reactant particle count ``n·y0``.
        a_n: Catalyst timescale multiplier (1 recovers the comparable-
            timescale model).
    """

    n: int
    lambda1: float
    lambda2: float
    pmf1: OffspringPmf
    pmf2: OffspringPmf
    x0_count: int
    y0_count: int
    a_n: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError([ConditionCheck("n_positive", False, f"n={self.n!r}")])
        if not isinstance(self.x0_count, int) or not isinstance(self.y0_count, int):
            raise ValidationError(
                [ConditionCheck("counts_integer", False, "initial counts must be integers")]
            )

    @classmethod
    def from_masses(
        cls,
        n: int,
        lambda1: float,
        lambda2: float,
        pmf1: OffspringPmf,
        pmf2: OffspringPmf,
        x0: float = 1.0,
        y0: float = 1.0,
        a_n: float = 1.0,
    ) -> BranchingParams:
        """Build from scaled initial masses, rejecting values off the lattice."""
        return cls(
            n=n,
            lambda1=lambda1,
            lambda2=lambda2,
            pmf1=pmf1,
            pmf2=pmf2,
            x0_count=_to_count(x0, n, "x0"),
            y0_count=_to_count(y0, n, "y0"),
            a_n=a_n,
        )

    @property
    def x0(self) -> float:
        return self.x0_count / self.n

    @property
    def y0(self) -> float:
        return self.y0_count / self.n

    @property
    def m1(self) -> float:
        return offspring_moments(self.pmf1)[0]

    @property
    def m2(self) -> float:
        return offspring_moments(self.pmf2)[0]

    @property
    def alpha1(self) -> float:
        return offspring_moments(self.pmf1)[1]

    @property
    def alpha2(self) -> float:
        return offspring_moments(self.pmf2)[1]

    @property
    def c1(self) -> float:
        """Drift constant ``n(m1 − 1)``."""
        return self.n * (self.m1 - 1.0)

    @property
    def c2(self) -> float:
        return self.n * (self.m2 - 1.0)

    @property
    def mu1_zero(self) -> float:
        """Catalyst probability of no offspring, which drives replenishment."""
        return self.pmf1.mass(0)

    def with_a_n(self, a_n: float) -> BranchingParams:
        return replace(self, a_n=a_n)


@dataclass(frozen=True, slots=True)
class DiffusionParams:
    """Constants of the reflected catalyst / reactant diffusion.

    Attributes:
        c1: Catalyst drift constant (negative for a subcritical catalyst).
        c2: Reactant drift constant.
        alpha1: Catalyst offspring-spread constant.
        alpha2: Reactant offspring-spread constant.
        lambda1: Catalyst rate constant.
        lambda2: Reactant rate constant.
        x0: Initial catalyst mass, at least 1.
        y0: Initial reactant mass, nonnegative.
        a_n: Catalyst timescale multiplier, at least 1.

    Raises:
        ValidationError: Aggregating every violated invariant.
    """

    c1: float
    c2: float
    alpha1: float
    alpha2: float
    lambda1: float = 1.0
    lambda2: float = 1.0
    x0: float = 1.0
    y0: float = 1.0
    a_n: float = 1.0

    def __post_init__(self) -> None:
        checks = [
            ConditionCheck("alpha1_positive", self.alpha1 > 0, f"alpha1={self.alpha1!r}"),
            ConditionCheck("alpha2_positive", self.alpha2 > 0, f"alpha2={self.alpha2!r}"),
            ConditionCheck("lambda1_positive", self.lambda1 > 0, f"lambda1={self.lambda1!r}"),
            ConditionCheck("lambda2_positive", self.lambda2 > 0, f"lambda2={self.lambda2!r}"),
            ConditionCheck("x0_at_least_one", self.x0 >= 1, f"x0={self.x0!r}"),
            ConditionCheck("y0_nonnegative", self.y0 >= 0, f"y0={self.y0!r}"),
            ConditionCheck("a_n_at_least_one", self.a_n >= 1, f"a_n={self.a_n!r}"),
        ]
        failures = [c for c in checks if not c.passed]
        if failures:
            raise ValidationError(failures, context="DiffusionParams")

    @classmethod
    def from_branching(cls, params: BranchingParams) -> DiffusionParams:
        """Limit constants read off one branching parameterization."""
        return cls(
            c1=params.c1,
            c2=params.c2,
            alpha1=params.alpha1,
            alpha2=params.alpha2,
            lambda1=params.lambda1,
            lambda2=params.lambda2,
            x0=params.x0,
            y0=params.y0,
            a_n=params.a_n,
        )

    def require_subcritical(self) -> DiffusionParams:
        """Return ``self`` if ``c1 < 0``, else raise :class:`ValidationError`."""
        if not self.c1 < 0:
            raise ValidationError(
                [ConditionCheck("c1_subcritical", False, f"c1={self.c1!r} is not negative")]
            )
        return self

    def with_a_n(self, a_n: float) -> DiffusionParams:
        return replace(self, a_n=a_n)


def matched_branching_params(limit: DiffusionParams, n: int) -> BranchingParams:
    """The member at scale ``n`` of the canonical family converging to ``limit``.

    Offspring laws come from :func:`near_critical_pmf`, so the drift and
    spread constants equal the limit ones at every ``n``; initial masses are
    rounded to the nearest lattice point (catalyst never below ``n``).
    """
    return BranchingParams(
        n=n,
        lambda1=limit.lambda1,
        lambda2=limit.lambda2,
        pmf1=near_critical_pmf(n, limit.c1, limit.alpha1),
        pmf2=near_critical_pmf(n, limit.c2, limit.alpha2),
        x0_count=max(n, round(limit.x0 * n)),
        y0_count=round(limit.y0 * n),
        a_n=limit.a_n,
    )


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """Outcome of checking one parameterization.

    Attributes:
        checks: Every condition evaluated, in a stable order.
        notes: Statements about conditions that hold automatically or that
            cannot be judged on a single ``n``.
    """

    checks: tuple[ConditionCheck, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[ConditionCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)


def check_conditions(
    params: BranchingParams, require_subcritical: bool = False
) -> ValidationReport:
    """Evaluate every per-``n`` standing condition without raising.

    Args:
        params: The parameterization to check.
        require_subcritical: Also require ``c1 < 0``.

    Returns:
        A :class:`ValidationReport`; idempotent and side-effect free.
    """
    n = params.n
    c1, c2 = params.c1, params.c2
    alpha1, alpha2 = params.alpha1, params.alpha2
    checks = [
        ConditionCheck("lambda1_positive", params.lambda1 > 0, f"lambda1={params.lambda1!r}"),
        ConditionCheck("lambda2_positive", params.lambda2 > 0, f"lambda2={params.lambda2!r}"),
        ConditionCheck("alpha1_positive", alpha1 > 0, f"alpha1={alpha1!r} must lie in (0, inf)"),
        ConditionCheck("alpha2_positive", alpha2 > 0, f"alpha2={alpha2!r} must lie in (0, inf)"),
        ConditionCheck("c1_above_minus_n", c1 > -n, f"c1={c1!r}, n={n}"),
        ConditionCheck("c2_above_minus_n", c2 > -n, f"c2={c2!r}, n={n}"),
        ConditionCheck("x0_at_least_one", params.x0_count >= n, f"x0={params.x0!r}"),
        ConditionCheck("y0_nonnegative", params.y0_count >= 0, f"y0={params.y0!r}"),
        ConditionCheck("a_n_at_least_one", params.a_n >= 1, f"a_n={params.a_n!r}"),
    ]
    if require_subcritical:
        checks.append(ConditionCheck("c1_subcritical", c1 < 0, f"c1={c1!r} must be negative"))
    mgf = offspring_mgf(params.pmf1, DEFAULT_MGF_DELTA)
    checks.append(
        ConditionCheck(
            "catalyst_mgf_bounded",
            math.isfinite(mgf),
            f"finite support K={params.pmf1.k_max}; mgf({DEFAULT_MGF_DELTA:g})={mgf:.6g}",
        )
    )
    notes = (
        "finite-support offspring laws have a finite mgf for every delta, so a feasible "
        "delta-bar always exists",
        "convergence of (c_i, alpha_i, lambda_i, x0, y0) and the offspring tail condition "
        "concern a sequence of n; use family_check",
    )
    return ValidationReport(checks=tuple(checks), notes=notes)


def validate(params: BranchingParams, require_subcritical: bool = False) -> ValidationReport:
    """Check the per-``n`` standing conditions, raising on any failure.

    Raises:
        ValidationError: Aggregating every failed :class:`ConditionCheck`.
    """
    report = check_conditions(params, require_subcritical)
    if not report.passed:
        raise ValidationError(report.failures, context=f"BranchingParams(n={params.n})")
    return report


@dataclass(frozen=True, slots=True)
class FamilyRow:
    """Per-``n`` diagnostics of a parameter family."""

    n: int
    tail1: float
    tail2: float
    c1: float
    c2: float
    alpha1: float
    alpha2: float
    lambda1: float
    lambda2: float
    mgf1: float


@dataclass(frozen=True, slots=True)
class FamilyReport:
    """Trajectories of the family constants and the offspring tail sums.

    Attributes:
        epsilon: Threshold factor in ``l > ε√n``.
        rows: One row per family member, ordered by ``n``.
        flags: Human-readable warnings about tails that fail to vanish
            monotonically. Empty when no trend can be judged.
        tails_vanishing: ``None`` for a single row (no trend verdict).
    """

    epsilon: float
    rows: tuple[FamilyRow, ...]
    flags: tuple[str, ...]
    tails_vanishing: bool | None

    @property
    def sup_mgf(self) -> float:
        return max(r.mgf1 for r in self.rows)


def offspring_tail(pmf: OffspringPmf, n: int, epsilon: float) -> float:
    """``Σ_{l > ε√n} (l − m)² μ(l)`` by direct summation."""
    mean, _ = offspring_moments(pmf)
    threshold = epsilon * math.sqrt(n)
    return math.fsum((l - mean) ** 2 * p for l, p in enumerate(pmf.probs) if l > threshold)


def _trend_flags(name: str, ns: Sequence[int], tails: Sequence[float]) -> list[str]:
    flags = []
    for i in range(1, len(tails)):
        if tails[i] > tails[i - 1]:
            flags.append(
                f"{name} increases from n={ns[i - 1]} ({tails[i - 1]:.3g}) to n={ns[i]} ({tails[i]:.3g})"
            )
    return flags


def family_check(
    params_list: Sequence[BranchingParams],
    epsilon: float,
    delta_bar: float = DEFAULT_MGF_DELTA,
) -> FamilyReport:
    """Report the convergence diagnostics of a parameter family.

    Args:
        params_list: Family members ordered by strictly increasing ``n``.
        epsilon: Tail threshold factor, positive.
        delta_bar: Exponent at which the catalyst mgf is reported.

    Raises:
        FamilyError: If the list is empty or not ordered by increasing ``n``.
    """
    if not params_list:
        raise FamilyError("parameter family is empty")
    ns = [p.n for p in params_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise FamilyError(f"family must be ordered by increasing n, got {ns}")
    rows = tuple(
        FamilyRow(
            n=p.n,
            tail1=offspring_tail(p.pmf1, p.n, epsilon),
            tail2=offspring_tail(p.pmf2, p.n, epsilon),
            c1=p.c1,
            c2=p.c2,
            alpha1=p.alpha1,
            alpha2=p.alpha2,
            lambda1=p.lambda1,
            lambda2=p.lambda2,
            mgf1=offspring_mgf(p.pmf1, delta_bar),
        )
        for p in params_list
    )
    if len(rows) == 1:
        return FamilyReport(epsilon=epsilon, rows=rows, flags=(), tails_vanishing=None)
    flags = _trend_flags("tail1", ns, [r.tail1 for r in rows])
    flags += _trend_flags("tail2", ns, [r.tail2 for r in rows])
    return FamilyReport(epsilon=epsilon, rows=rows, flags=tuple(flags), tails_vanishing=not flags)
