"""Tests for the verification studies.

The quick tests run tiny sweeps and check report structure plus the
verdicts that hold exactly; the slow ones run at acceptance scale.
"""

import pytest

from catbp_core import (
    BranchingParams,
    DiffusionParams,
    FamilyError,
    InvalidHorizonError,
    InvalidRegimeError,
    OffspringPmf,
    StationaryLaw,
    ValidationError,
    default_test_library,
)
from catbp_engine.verify.report import Rule
from catbp_engine.verify.statistics import ks_critical_value
from catbp_engine.verify.studies import (
    DEFAULT_LIMIT,
    check_family_matches,
    study_averaging,
    study_diffusion_limit,
    study_echeverria,
    study_martingale,
    study_stationary,
)

DEFAULT = OffspringPmf((0.3, 0.45, 0.25))
DELTA_1 = OffspringPmf((0.0, 1.0))
SUPERCRITICAL = DiffusionParams(c1=0.5, c2=-1.0, alpha1=0.55, alpha2=0.55)
AVERAGING_LIMIT = DiffusionParams(c1=-1.0, c2=-0.5, alpha1=1.0, alpha2=1.0)


@pytest.fixture
def default_params():
    return BranchingParams.from_masses(20, 1.0, 1.0, DEFAULT, DEFAULT)


# ---------------------------------------------------------------------------
# Family matching
# ---------------------------------------------------------------------------


class TestFamily:
    def test_fixed_pmf_matches_at_its_own_scale(self, default_params):
        check_family_matches([default_params], DEFAULT_LIMIT)

    def test_fixed_pmf_drifts_away(self, default_params):
        doubled = BranchingParams.from_masses(40, 1.0, 1.0, DEFAULT, DEFAULT)
        with pytest.raises(FamilyError, match="c1"):
            check_family_matches([default_params, doubled], DEFAULT_LIMIT)

    @pytest.mark.parametrize("n_list", [(), (50, 25), (25, 25)])
    def test_sweep_must_increase(self, n_list):
        with pytest.raises(FamilyError):
            study_diffusion_limit(n_list, 0.5, 10, 1)


# ---------------------------------------------------------------------------
# Stationarity criterion
# ---------------------------------------------------------------------------


class TestEcheverria:
    def test_true_law_passes(self):
        report = study_echeverria(StationaryLaw.from_params(DEFAULT_LIMIT))
        assert report.passed
        assert len(report.sweep) == len(default_test_library())
        assert report.metric("max_abs_residual").value < 1e-6

    def test_mutation_rows_are_judged_only_with_boundary_slope(self):
        report = study_echeverria(StationaryLaw(-2.0, 1.3), lambda1=0.7)
        for name in report.sweep:
            slope = report.metric("boundary_slope", name).value
            rule = report.metric("abs_mutated_residual", name).rule
            assert rule is (Rule.ABOVE if slope != 0.0 else Rule.RECORD)

    def test_deterministic(self):
        law = StationaryLaw.from_params(DEFAULT_LIMIT)
        first, second = study_echeverria(law), study_echeverria(law)
        assert [r.value for r in first.rows] == [r.value for r in second.rows]


# ---------------------------------------------------------------------------
# Martingale identities
# ---------------------------------------------------------------------------


class TestMartingale:
    def test_residual_rows(self, default_params):
        report = study_martingale(default_params, 0.5, 1000, 3, threads=2)
        for metric in ("residual_x_mean", "residual_y_mean", "shadow_gap_mean"):
            assert report.metric(metric).rule is Rule.WITHIN_SE
        assert report.metric("catalyst_below_boundary").verdict is True
        assert report.metric("qv_x_relative_gap").rule is Rule.BELOW
        assert report.metric("mean_event_count").value > 0
        assert report.metric("mean_immigrations").value > 0
        assert report.settings["pmf1"] == "0:0.3, 1:0.45, 2:0.25"

    def test_point_mass_law_has_zero_residuals(self):
        frozen = BranchingParams(n=10, lambda1=1.0, lambda2=1.0, pmf1=DELTA_1, pmf2=DELTA_1, x0_count=20, y0_count=10)
        report = study_martingale(frozen, 1.0, 50, 4, batches=5)
        assert report.passed
        assert report.metric("residual_x_variance").value == 0.0
        assert report.metric("sup_x_squared_mean").value == pytest.approx(4.0)

    def test_seeded_runs_repeat(self, default_params):
        first = study_martingale(default_params, 0.25, 100, 5, threads=1)
        second = study_martingale(default_params, 0.25, 100, 5, threads=3)
        assert [r.value for r in first.rows] == [r.value for r in second.rows]

    @pytest.mark.slow
    def test_acceptance(self, default_params):
        assert study_martingale(default_params, 1.0, 10_000, 20260101).passed


# ---------------------------------------------------------------------------
# Diffusion limit
# ---------------------------------------------------------------------------


class TestDiffusionLimit:
    def test_report_layout(self):
        report = study_diffusion_limit((10, 20), 0.5, 200, 6, dt=1e-2)
        assert report.sweep == (10, 20)
        assert report.metric("ks_catalyst", "n=10").rule is Rule.RECORD
        assert report.metric("ks_catalyst", "n=20").rule is Rule.BELOW
        assert report.metric("ks_catalyst_max_increase").rule is Rule.RECORD
        assert report.metric("catalyst_below_boundary").verdict is True
        assert report.settings["steps"] == 50
        halving = report.metric("sde_dt_halving_gap")
        assert halving.rule is Rule.WITHIN_SE
        assert halving.param == "dt=0.01"
        assert halving.verdict is True

    def test_trend_is_judged_with_repeats(self):
        report = study_diffusion_limit((10, 20), 0.25, 100, 7, dt=1e-2, repeats=2)
        assert report.metric("ks_catalyst_max_increase").rule is Rule.AT_MOST
        assert report.metric("ks_catalyst", "n=20").stderr >= 0.0

    @pytest.mark.slow
    def test_acceptance(self):
        report = study_diffusion_limit((25, 50, 100), 1.0, 10_000, 20260101)
        assert report.metric("ks_catalyst", "n=100").verdict is True
        assert report.metric("catalyst_below_boundary").verdict is True
        assert report.metric("sde_dt_halving_gap").verdict is True

    @pytest.mark.slow
    def test_trend_over_twenty_repeats(self):
        report = study_diffusion_limit((25, 50, 100), 1.0, 2000, 20260102, repeats=20)
        assert report.metric("ks_catalyst_max_increase").verdict is True
        assert report.metric("ks_reactant_max_increase").verdict is True


# ---------------------------------------------------------------------------
# Stationary convergence
# ---------------------------------------------------------------------------


class TestStationary:
    def test_report_layout(self):
        report = study_stationary((10, 20), 200, 8, burn_in=5.0, gap=0.5)
        assert report.metric("ks_occupation", "n=20").rule is Rule.BELOW
        sampler = report.metric("ks_sampler", "exact")
        assert sampler.tolerance == pytest.approx(ks_critical_value(200))
        law = StationaryLaw.from_params(DEFAULT_LIMIT)
        assert report.metric("mean_mX").value == pytest.approx(law.mean)
        assert report.metric("ergodic_relative_gap", "n=20").rule is Rule.BELOW
        assert [r.param for r in report.rows if r.metric == "exp_moment"] == ["t=1", "t=5", "t=25"]
        assert report.metric("exp_moment_stationary").value == pytest.approx(law.exponential_moment(0.1))
        ratio = report.metric("exp_moment_ratio")
        assert ratio.rule is Rule.AT_MOST
        assert ratio.verdict is True

    def test_moment_rows_can_be_skipped(self):
        report = study_stationary((10,), 50, 8, burn_in=5.0, gap=0.5, moment_reps=0)
        assert not [r for r in report.rows if r.metric.startswith("exp_moment")]

    def test_pinned_member_is_recorded_only(self):
        # n = 1 with alpha1 = 1: the catalyst always dies and immigrates
        pinned = DiffusionParams(c1=-1.0, c2=-1.0, alpha1=1.0, alpha2=1.0)
        report = study_stationary((1, 10), 50, 8, limit=pinned, burn_in=5.0, gap=0.5, moment_reps=0)
        assert report.metric("ks_occupation", "n=1").rule is Rule.RECORD
        assert any("delta_0" in note for note in report.notes)

    def test_requires_subcritical_catalyst(self):
        with pytest.raises(ValidationError):
            study_stationary((10,), 10, 0, limit=SUPERCRITICAL)

    @pytest.mark.slow
    def test_acceptance(self):
        report = study_stationary((25, 50, 100), 10_000, 20260101)
        assert report.metric("ks_occupation", "n=100").verdict is True
        assert report.metric("ergodic_relative_gap", "n=100").verdict is True
        assert report.metric("ks_sampler").verdict is True
        assert report.metric("exp_moment_ratio").verdict is True

    @pytest.mark.slow
    def test_trend_over_twenty_repeats(self):
        report = study_stationary((25, 50, 100), 2000, 20260102, repeats=20)
        assert report.metric("ks_occupation_max_increase").verdict is True
        assert report.metric("ks_occupation", "n=25").value > report.metric("ks_occupation", "n=100").value


# ---------------------------------------------------------------------------
# Stochastic averaging
# ---------------------------------------------------------------------------


class TestAveraging:
    def test_absent_reactant_is_exact(self):
        empty = DiffusionParams(c1=-1.0, c2=-1.0, alpha1=0.55, alpha2=0.55, y0=0.0)
        report = study_averaging((1.0, 4.0), "diffusion", 0.25, 100, 9, limit=empty, dt=1e-2, repeats=2)
        assert report.study == "averaging_diffusion"
        assert report.metric("ks_reactant", "a_n=4").value == 0.0
        assert report.metric("ks_reactant_change").rule is Rule.RECORD
        assert report.passed
        assert report.notes

    def test_branching_regime(self):
        report = study_averaging((1.0, 2.0), "branching", 0.25, 50, 10, n=10)
        assert report.study == "averaging_branching"
        assert report.metric("mean_deviation", "a_n=2").rule is Rule.WITHIN_SE
        assert report.metric("window_catalyst_mean", "a_n=1").value >= 1.0

    def test_unknown_regime(self):
        with pytest.raises(InvalidRegimeError):
            study_averaging((1.0,), "jump", 1.0, 10, 0)

    def test_evaluation_time_must_be_positive(self):
        with pytest.raises(InvalidHorizonError):
            study_averaging((1.0,), "diffusion", 0.0, 10, 0)

    def test_requires_subcritical_catalyst(self):
        with pytest.raises(ValidationError):
            study_averaging((1.0,), "diffusion", 1.0, 10, 0, limit=SUPERCRITICAL)

    @pytest.mark.slow
    def test_acceptance(self):
        report = study_averaging((1.0, 4.0, 16.0, 64.0), "diffusion", 1.0, 10_000, 20260101, limit=AVERAGING_LIMIT)
        assert report.metric("mean_closed_form").value == pytest.approx(0.5006, abs=1e-4)
        for metric in ("ks_reactant", "mean_deviation", "variance_deviation"):
            assert report.metric(metric, "a_n=64").verdict is True

    @pytest.mark.slow
    def test_trend_over_twenty_repeats(self):
        report = study_averaging(
            (1.0, 64.0), "diffusion", 1.0, 2000, 20260102, limit=AVERAGING_LIMIT, repeats=20
        )
        assert report.metric("ks_reactant_change").rule is Rule.BELOW
        assert report.metric("ks_reactant_change").verdict is True

    @pytest.mark.slow
    def test_branching_regime_at_acceptance_scale(self):
        report = study_averaging((1.0, 16.0), "branching", 1.0, 4000, 20260103, limit=AVERAGING_LIMIT, n=100)
        for metric in ("ks_reactant", "mean_deviation", "variance_deviation"):
            assert report.metric(metric, "a_n=16").verdict is True
        window = report.metric("window_catalyst_mean", "a_n=16")
        assert window.value == pytest.approx(report.metric("mean_mX").value, abs=max(4 * window.stderr, 0.05))
