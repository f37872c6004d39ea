"""Tests for the stationary law, its sampler, and the generator-orthogonality residual."""

import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial
from scipy import integrate, special, stats

from catbp_core import (
    DiffusionParams,
    InvalidLawError,
    StationaryLaw,
    TestFunction,
    UnboundedSupportError,
    averaged_coefficients,
    default_test_library,
    echeverria_residual,
    mean_mX,
    mean_mX_quadrature,
    residual_table,
    sample,
    theta,
)


@pytest.fixture(scope="module")
def law():
    return StationaryLaw(-1.0, 1.0)


@pytest.fixture(scope="module")
def wide_law():
    # beta = 0.2: enough mass out to x = 20 for quantile round trips
    return StationaryLaw(-0.1, 1.0)


# ---------------------------------------------------------------------------
# Normalization and mean
# ---------------------------------------------------------------------------


class TestTheta:
    @pytest.mark.parametrize(
        "c1,alpha1,expected", [(-1.0, 1.0, 20.4497), (-0.5, 1.0, 4.5582)]
    )
    def test_known_values(self, c1, alpha1, expected):
        assert theta(c1, alpha1) == pytest.approx(expected, abs=1e-3)

    @pytest.mark.parametrize("c1,alpha1", [(-1.0, 1.0), (-0.5, 1.0), (-0.05, 2.0), (-30.0, 0.5)])
    def test_matches_exponential_integral(self, c1, alpha1):
        beta = -2.0 * c1 / alpha1
        assert theta(c1, alpha1) == pytest.approx(1.0 / special.exp1(beta), rel=1e-10)

    @pytest.mark.parametrize("c1,alpha1", [(0.0, 1.0), (0.5, 1.0), (-1.0, 0.0), (-1.0, -2.0)])
    def test_invalid_signs(self, c1, alpha1):
        with pytest.raises(InvalidLawError):
            theta(c1, alpha1)

    def test_density_integrates_to_one(self, law):
        total, _ = integrate.quad(
            lambda x: float(law.pdf(x)), 1.0, law.x_max, epsabs=0.0, epsrel=1e-12, limit=400
        )
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_error_budget_is_tiny(self, law):
        assert law.norm_error < 1e-10 * law.norm


class TestMeanMX:
    @pytest.mark.parametrize("c1,alpha1,expected", [(-1.0, 1.0, 1.3838), (-0.5, 1.0, 1.6768)])
    def test_known_values(self, c1, alpha1, expected):
        assert mean_mX(c1, alpha1) == pytest.approx(expected, abs=1e-3)

    def test_closed_form_written_out(self):
        c1, alpha1 = -0.7, 1.3
        closed = -(alpha1 * theta(c1, alpha1) / (2 * c1)) * math.exp(2 * c1 / alpha1)
        assert mean_mX(c1, alpha1) == pytest.approx(closed, rel=1e-12)

    def test_closed_form_matches_quadrature(self):
        rng = np.random.default_rng(5)
        for c1, alpha1 in zip(-rng.uniform(0.05, 5.0, 20), rng.uniform(0.1, 3.0, 20)):
            assert mean_mX(c1, alpha1) == pytest.approx(mean_mX_quadrature(c1, alpha1), rel=1e-9)

    def test_law_mean_property(self, law):
        assert law.mean == pytest.approx(mean_mX(-1.0, 1.0), rel=1e-14)
        assert law.theta == pytest.approx(theta(-1.0, 1.0), rel=1e-14)

    @pytest.mark.parametrize("delta", [-0.5, 0.1, 1.0, 1.9])
    def test_exponential_moment_matches_exponential_integral(self, law, delta):
        expected = special.exp1(2.0 - delta) / special.exp1(2.0)
        assert law.exponential_moment(delta) == pytest.approx(expected, rel=1e-9)

    def test_exponential_moment_slope_at_zero_is_the_mean(self, law):
        h = 1e-4
        slope = (law.exponential_moment(h) - law.exponential_moment(-h)) / (2 * h)
        assert law.exponential_moment(0.0) == 1.0
        assert slope == pytest.approx(law.mean, rel=1e-6)

    def test_exponential_moment_diverges_at_beta(self, law):
        with pytest.raises(ValueError, match="diverges"):
            law.exponential_moment(2.0)

    def test_averaged_coefficients(self):
        params = DiffusionParams(c1=-1.0, c2=-0.5, alpha1=1.0, alpha2=1.0)
        b, a = averaged_coefficients(params)
        assert math.exp(b) == pytest.approx(0.5006, abs=1e-4)
        assert a == pytest.approx(mean_mX(-1.0, 1.0))


# ---------------------------------------------------------------------------
# Density, CDF, quantile
# ---------------------------------------------------------------------------


class TestDistribution:
    def test_pdf_below_boundary_is_zero(self, law):
        np.testing.assert_array_equal(law.pdf(np.array([-3.0, 0.0, 0.999])), 0.0)

    def test_pdf_formula_and_envelope(self, law):
        xs = np.linspace(1.0, 15.0, 57)
        expected = law.theta / xs * np.exp(2 * law.c1 * xs / law.alpha1)
        np.testing.assert_allclose(law.pdf(xs), expected, rtol=1e-12)
        assert np.all(law.pdf(xs) <= law.theta * np.exp(2 * law.c1 * xs / law.alpha1) * (1 + 1e-12))

    def test_cdf_shape(self, law):
        xs = np.linspace(0.0, 30.0, 3001)
        cdf = law.cdf(xs)
        assert law.cdf(1.0) == 0.0
        assert np.all(np.diff(cdf) >= -1e-15)
        assert cdf[-1] == pytest.approx(1.0, abs=1e-15)

    def test_cdf_matches_quadrature(self, wide_law):
        for x in (1.01, 1.7, 4.0, 11.3, 60.0):
            direct, _ = integrate.quad(lambda s: float(wide_law.pdf(s)), 1.0, x, epsabs=0.0, epsrel=1e-12)
            assert float(wide_law.cdf(x)) == pytest.approx(direct, abs=1e-12)

    def test_quantile_inverts_cdf(self, wide_law):
        for x in np.linspace(1.0, 20.0, 39):
            assert wide_law.quantile(float(wide_law.cdf(x))) == pytest.approx(x, abs=1e-8)

    def test_quantile_inverts_cdf_while_the_level_resolves_x(self, law):
        # pdf(7.5) ≈ 8e-7, so a level rounded to 1e-16 still pins x to 1e-9
        for x in np.linspace(1.0, 7.5, 27):
            assert law.quantile(float(law.cdf(x))) == pytest.approx(x, abs=1e-8)

    @pytest.mark.parametrize("c1,alpha1", [(-1.0, 1.0), (-1.0, 0.55)])
    def test_sf_matches_exponential_integral(self, c1, alpha1):
        tight = StationaryLaw(c1, alpha1)
        xs = np.linspace(1.0, 20.0, 39)
        expected = special.exp1(tight.beta * xs) / special.exp1(tight.beta)
        np.testing.assert_allclose(tight.sf(xs), expected, rtol=1e-9)

    def test_sf_complements_cdf(self, law):
        xs = np.linspace(0.5, 12.0, 47)
        np.testing.assert_allclose(law.sf(xs) + law.cdf(xs), 1.0, atol=1e-13)
        assert float(law.sf(0.5)) == 1.0

    @pytest.mark.parametrize("c1,alpha1", [(-1.0, 1.0), (-1.0, 0.55)])
    def test_isf_inverts_sf_on_the_whole_range(self, c1, alpha1):
        tight = StationaryLaw(c1, alpha1)
        # for (-1, 0.55) the upper half lies past x_max ≈ 12.4
        for x in np.linspace(1.0, 20.0, 39):
            assert tight.isf(float(tight.sf(x))) == pytest.approx(x, abs=1e-8)

    def test_upper_quantiles_go_through_the_survival_side(self, law):
        for q in (0.6, 0.9, 1.0 - 1e-9):
            assert law.quantile(q) == law.isf(1.0 - q)
            assert float(law.cdf(law.quantile(q))) == pytest.approx(q, abs=1e-13)

    def test_quantile_edges(self, law):
        assert law.quantile(0.0) == 1.0
        assert law.quantile(1.0) == law.x_max
        assert law.isf(1.0) == 1.0
        assert law.isf(0.0) == law.x_max
        with pytest.raises(ValueError):
            law.quantile(1.5)
        with pytest.raises(ValueError):
            law.isf(-0.1)

    def test_table(self, law):
        xs, pdf, cdf = law.table(np.array([1.0, 2.0]))
        np.testing.assert_array_equal(xs, [1.0, 2.0])
        assert pdf[0] == pytest.approx(law.theta * math.exp(-2.0))
        assert cdf[0] == 0.0


# ---------------------------------------------------------------------------
# Exact sampler
# ---------------------------------------------------------------------------


class TestSampler:
    def test_envelope_tight_at_boundary(self, law):
        assert law.acceptance_probability(1.0) == 1.0

    def test_single_draws_are_in_support(self, law):
        rng = np.random.default_rng(3)
        draws = [sample(law, rng) for _ in range(200)]
        assert min(draws) >= 1.0

    def test_mean_of_a_million_draws(self, law):
        draws = law.sample_many(1_000_000, np.random.default_rng(17))
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - 1.3838) < 4 * se + 1e-4

    def test_deterministic_given_generator(self, law):
        first = law.sample_many(500, np.random.default_rng(9))
        second = law.sample_many(500, np.random.default_rng(9))
        np.testing.assert_array_equal(first, second)

    def test_ks_at_95_percent_level(self, law):
        """Each batch of 10^5 draws passes the 95% KS level with probability 0.95.

        Over 20 independent batches at least 16 must pass; fewer happens with
        probability below 0.3% for an exact sampler.
        """
        critical = 1.36 / math.sqrt(100_000)
        rng = np.random.default_rng(123)
        passes = 0
        for _ in range(20):
            draws = law.sample_many(100_000, rng)
            distance = stats.kstest(draws, lambda x: law.cdf(x)).statistic
            passes += distance < critical
        assert passes >= 16


# ---------------------------------------------------------------------------
# Test functions and the orthogonality residual
# ---------------------------------------------------------------------------


class TestTestFunction:
    def test_library_has_ten_members(self):
        library = default_test_library()
        assert len(library) == 10
        assert sum(phi.slope_at_boundary != 0 for phi in library) >= 5

    def test_boundary_slope_of_quartic(self):
        quartic = next(phi for phi in default_test_library() if phi.name == "(x-4)^4")
        assert quartic.slope_at_boundary == pytest.approx(-108.0)

    def test_vanishes_beyond_support(self):
        phi = default_test_library()[1]
        np.testing.assert_array_equal(phi.value(np.array([4.5, 10.0])), 0.0)
        np.testing.assert_array_equal(phi.first(np.array([4.5])), 0.0)

    def test_derivatives(self):
        phi = TestFunction((1.0, 3.0), (Polynomial([-3.0, 1.0]) ** 2,), "(x-3)^2")
        np.testing.assert_allclose(phi.value(np.array([1.0, 2.0])), [4.0, 1.0])
        np.testing.assert_allclose(phi.first(np.array([1.0, 2.0])), [-4.0, -2.0])
        np.testing.assert_allclose(phi.second(np.array([1.5])), [2.0])

    def test_rejects_kink(self):
        with pytest.raises(ValueError, match="not C1"):
            TestFunction(
                (1.0, 2.0, 3.0),
                (Polynomial([-3.0, 1.0]) ** 2, Polynomial([3.0, -1.0])),
            )

    def test_rejects_nonvanishing_end(self):
        with pytest.raises(UnboundedSupportError):
            TestFunction((1.0, 3.0), (Polynomial([1.0]),))

    def test_rejects_unbounded_support(self):
        with pytest.raises(UnboundedSupportError):
            TestFunction((1.0, math.inf), (Polynomial([0.0]),))


class TestEcheverriaResidual:
    def test_zero_function(self, law):
        zero = TestFunction((1.0, 2.0), (Polynomial([0.0]),), "zero")
        assert echeverria_residual(law, zero, 1.0) == 0.0

    def test_interior_bump(self, law):
        phi = default_test_library()[0]
        assert phi.slope_at_boundary == 0.0
        assert abs(echeverria_residual(law, phi, 1.0)) < 1e-6

    def test_boundary_term_quartic(self, law):
        quartic = default_test_library()[1]
        assert abs(echeverria_residual(law, quartic, 1.0)) < 1e-6

    @pytest.mark.parametrize("c1,alpha1,lambda1", [(-1.0, 1.0, 1.0), (-0.5, 1.0, 2.0), (-2.0, 0.7, 0.5)])
    def test_whole_library_vanishes(self, c1, alpha1, lambda1):
        law = StationaryLaw(c1, alpha1)
        for phi in default_test_library():
            assert abs(echeverria_residual(law, phi, lambda1)) < 1e-6, phi.name

    def test_wrong_boundary_constant_is_detected(self, law):
        rows = residual_table(law, default_test_library(), 1.0)
        for name, slope, residual, mutated in rows:
            assert abs(residual) < 1e-6, name
            if slope != 0.0:
                assert abs(mutated) > 1e-3, name

    def test_explicit_constant_override(self, law):
        quartic = default_test_library()[1]
        shifted = echeverria_residual(law, quartic, 1.0, boundary_constant=float(law.pdf(1.0)) / 2 + 1.0)
        assert shifted == pytest.approx(-108.0, abs=1e-6)
