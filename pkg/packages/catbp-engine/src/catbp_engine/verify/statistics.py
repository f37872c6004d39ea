"""Empirical-distribution primitives shared by the studies.

Distances are computed by scipy on the sorted sample values; this module
owns the sample container, the emptiness contract and the moment estimates
with their standard errors.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from catbp_core import EmptySampleError, InvalidHorizonError, Path, PathKind


@dataclass(frozen=True, slots=True, eq=False)
class EmpiricalSample:
    """Equally weighted sample, stored sorted ascending.

    Attributes:
        values: Sorted, read-only sample values.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.sort(np.asarray(self.values, dtype=np.float64).ravel())
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, values: Sequence[float] | np.ndarray) -> EmpiricalSample:
        return cls(np.asarray(values, dtype=np.float64))

    @property
    def count(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def require_nonempty(self, where: str) -> EmpiricalSample:
        if self.values.size == 0:
            raise EmptySampleError(context=where)
        return self


def ks_one_sample(sample: EmpiricalSample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov–Smirnov distance between ``sample`` and a continuous ``cdf``.

    ``D = max_i max(i/m − F(x_(i)), F(x_(i)) − (i−1)/m)``.

    Raises:
        EmptySampleError: If the sample is empty.
    """
    sample.require_nonempty("ks_one_sample")
    return float(stats.kstest(sample.values, cdf).statistic)


def ks_two_sample(a: EmpiricalSample, b: EmpiricalSample) -> float:
    """Sup-distance between two empirical CDFs.

    Raises:
        EmptySampleError: If either sample is empty.
    """
    a.require_nonempty("ks_two_sample")
    b.require_nonempty("ks_two_sample")
    return float(stats.ks_2samp(a.values, b.values).statistic)


def wasserstein1(a: EmpiricalSample, b: EmpiricalSample) -> float:
    """Wasserstein-1 distance between two empirical laws.

    For equal counts this is the mean absolute difference of matched order
    statistics. Unequal counts are compared exactly through their CDFs.

    Raises:
        EmptySampleError: If either sample is empty.
    """
    a.require_nonempty("wasserstein1")
    b.require_nonempty("wasserstein1")
    if a.count == b.count:
        return float(np.mean(np.abs(a.values - b.values)))
    return float(stats.wasserstein_distance(a.values, b.values))


def ks_critical_value(m: int, confidence: float = 0.95) -> float:
    """Asymptotic one-sample KS critical value ``K_conf / √m`` (``1.358/√m`` at 95%)."""
    if m < 1:
        raise EmptySampleError(context="ks_critical_value")
    return float(stats.kstwobign.ppf(confidence)) / math.sqrt(m)


def ergodic_average(path: Path, burn_in: float) -> float:
    """Time average of ``path`` over ``[burn_in, T]``.

    Exact for piecewise-constant paths; trapezoidal (hence exact) for
    piecewise-linear ones.

    Raises:
        InvalidHorizonError: If the path horizon does not exceed ``burn_in``.
    """
    horizon = path.horizon
    if not horizon > burn_in:
        raise InvalidHorizonError(f"path horizon {horizon!r} does not exceed burn-in {burn_in!r}")
    times, values = path.times, path.values
    if path.kind is PathKind.CONSTANT:
        clipped = np.maximum(times, burn_in)
        area = float(np.dot(values[:-1], np.diff(clipped)))
    else:
        keep = times > burn_in
        t = np.concatenate(([burn_in], times[keep]))
        v = np.concatenate(([np.interp(burn_in, times, values)], values[keep]))
        area = float(integrate.trapezoid(v, t))
    return area / (horizon - burn_in)


@dataclass(frozen=True, slots=True)
class MomentEstimate:
    """Sample mean and variance with their standard errors.

    The variance standard error uses the fourth central moment,
    ``SE(s²)² ≈ (m4 − s⁴)/m``.
    """

    count: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float

    @classmethod
    def of(cls, values: Sequence[float] | np.ndarray) -> MomentEstimate:
        """Estimate from raw values.

        Raises:
            EmptySampleError: For fewer than two values.
        """
        x = np.asarray(values, dtype=np.float64).ravel()
        if x.size < 2:
            raise EmptySampleError("need at least two values for a variance estimate", context="MomentEstimate")
        m = x.size
        mean = float(x.mean())
        centered = x - mean
        variance = float(centered @ centered) / (m - 1)
        fourth = float(np.mean(centered**4))
        return cls(
            count=m,
            mean=mean,
            mean_se=math.sqrt(variance / m),
            variance=variance,
            variance_se=math.sqrt(max(fourth - variance**2, 0.0) / m),
        )

