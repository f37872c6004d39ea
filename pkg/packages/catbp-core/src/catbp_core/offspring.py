"""Finite offspring laws and the quantities derived from them.

An :class:`OffspringPmf` is a probability vector over offspring counts
``k = 0..K``. Only finite supports are represented: every experiment at
desk scale uses one, sampling stays exact, and the bounded
moment-generating-function condition holds automatically.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidPmfError

#: Largest admissible offspring count (exclusive).
MAX_SUPPORT = 2**16

#: Tolerance on ``sum(probs) == 1``.
SUM_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class OffspringPmf:
    """Probability mass function over offspring counts ``0..K``.

    Immutable value object: equality and hashing are by the probability
    tuple, so the same law built twice compares equal.

    Attributes:
        probs: ``probs[k]`` is the probability of ``k`` offspring.

    Raises:
        InvalidPmfError: If an entry is negative or non-finite, the entries
            do not sum to 1 within :data:`SUM_TOLERANCE`, or the support
            reaches :data:`MAX_SUPPORT`.
    """

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.probs:
            raise InvalidPmfError("offspring law has no entries")
        if len(self.probs) > MAX_SUPPORT:
            raise InvalidPmfError(f"support size {len(self.probs)} reaches 2**16")
        if any(not math.isfinite(p) for p in self.probs):
            raise InvalidPmfError("offspring law has non-finite entries")
        if any(p < 0 for p in self.probs):
            raise InvalidPmfError(f"negative probability in {self.probs!r}")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidPmfError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_mapping(cls, masses: Mapping[int, float]) -> OffspringPmf:
        """Build a law from ``{k: probability}``; absent counts get mass 0."""
        if not masses:
            raise InvalidPmfError("offspring law has no entries")
        if min(masses) < 0:
            raise InvalidPmfError(f"negative offspring count in {dict(masses)!r}")
        probs = [0.0] * (max(masses) + 1)
        for k, p in masses.items():
            probs[k] = float(p)
        while len(probs) > 1 and probs[-1] == 0.0:
            probs.pop()
        return cls(tuple(probs))

    @classmethod
    def parse(cls, text: str) -> OffspringPmf:
        """Parse the config notation ``"0:0.3, 1:0.45, 2:0.25"``.

        Raises:
            InvalidPmfError: On malformed entries or repeated counts.
        """
        masses: dict[int, float] = {}
        for chunk in text.replace(";", ",").split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            key, sep, value = chunk.partition(":")
            if not sep:
                raise InvalidPmfError(f"expected 'k:p', got {chunk!r}")
            try:
                k, p = int(key), float(value)
            except ValueError as exc:
                raise InvalidPmfError(f"cannot parse {chunk!r}") from exc
            if k in masses:
                raise InvalidPmfError(f"offspring count {k} listed twice")
            masses[k] = p
        return cls.from_mapping(masses)

    @classmethod
    def delta(cls, k: int) -> OffspringPmf:
        """Point mass at ``k`` offspring."""
        return cls.from_mapping({k: 1.0})

    @property
    def k_max(self) -> int:
        return len(self.probs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)

    def mass(self, k: int) -> float:
        """Probability of exactly ``k`` offspring (0 outside the support)."""
        return self.probs[k] if 0 <= k < len(self.probs) else 0.0

    def to_text(self) -> str:
        """Inverse of :meth:`parse`, listing only the nonzero masses."""
        return ", ".join(f"{k}:{p!r}" for k, p in enumerate(self.probs) if p > 0)

    def __str__(self) -> str:
        return "{" + self.to_text() + "}"


def offspring_moments(pmf: OffspringPmf) -> tuple[float, float]:
    """Mean and spread of an offspring law.

    Args:
        pmf: The offspring law.

    Returns:
        ``(mean, spread)`` with ``mean = Σ k μ(k)`` and
        ``spread = Σ (k-1)² μ(k)``. The spread is the second moment about 1,
        not the variance; it vanishes only for the point mass at 1.
    """
    mean = math.fsum(k * p for k, p in enumerate(pmf.probs))
    spread = math.fsum((k - 1) ** 2 * p for k, p in enumerate(pmf.probs))
    return mean, spread


def offspring_mgf(pmf: OffspringPmf, delta: float) -> float:
    """Moment generating function ``Σ e^{δk} μ(k)`` of a finite law."""
    return math.fsum(math.exp(delta * k) * p for k, p in enumerate(pmf.probs))


def near_critical_pmf(n: int, c: float, alpha: float) -> OffspringPmf:
    """Three-point law on ``{0, 1, 2}`` with mean ``1 + c/n`` and spread ``alpha``.

    ``μ(0) = (α − c/n)/2``, ``μ(2) = (α + c/n)/2``, ``μ(1) = 1 − α``. This is
    the canonical matched family: every member has exactly the limit
    spread and drift constant, so ``c⁽ⁿ⁾ = c`` and ``α⁽ⁿ⁾ = α`` for all n.

    Raises:
        InvalidPmfError: Unless ``0 < alpha <= 1`` and ``|c|/n <= alpha``.
    """
    if n < 1:
        raise InvalidPmfError(f"lattice scale must be positive, got {n}")
    if not 0 < alpha <= 1:
        raise InvalidPmfError(f"three-point family needs 0 < alpha <= 1, got {alpha!r}")
    shift = c / n
    if abs(shift) > alpha:
        raise InvalidPmfError(
            f"|c|/n = {abs(shift)!r} exceeds alpha = {alpha!r}",
            context=f"near_critical_pmf(n={n})",
        )
    p0 = (alpha - shift) / 2
    p2 = (alpha + shift) / 2
    # Middle mass absorbs the rounding so the tuple sums to 1.
    p1 = max(1.0 - p0 - p2, 0.0)
    return OffspringPmf.from_mapping({0: p0, 1: p1, 2: p2})


@dataclass(frozen=True, slots=True, eq=False)
class AliasTable:
    """Walker alias table for O(1) offspring draws from one uniform.

    Draw: ``u ∈ [0,1)``, ``i = floor(u·K)``, ``f = u·K − i``; the outcome is
    ``i`` when ``f < prob[i]`` and ``alias[i]`` otherwise.

    Attributes:
        prob: Acceptance thresholds, one per column.
        alias: Fallback outcome per column.
    """

    prob: np.ndarray
    alias: np.ndarray

    @classmethod
    def build(cls, pmf: OffspringPmf) -> AliasTable:
        """Vose's construction of the alias table for ``pmf``."""
        size = len(pmf.probs)
        scaled = pmf.array * size
        prob = np.ones(size, dtype=np.float64)
        alias = np.arange(size, dtype=np.int64)
        small = [i for i in range(size) if scaled[i] < 1.0]
        large = [i for i in range(size) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = scaled[g] + scaled[s] - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # Leftovers are 1 up to rounding.
        for i in small + large:
            prob[i] = 1.0
            alias[i] = i
        return cls(prob=prob, alias=alias)
