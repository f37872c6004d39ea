"""Tests for the custom exception classes."""

import pytest

from catbp_core import (
    CatbpError,
    ConditionCheck,
    ConfigError,
    DivergedStepError,
    EmptySampleError,
    FamilyError,
    GridMismatchError,
    InvalidHorizonError,
    InvalidLawError,
    InvalidPathError,
    InvalidPmfError,
    InvalidRegimeError,
    MissingEventLogError,
    PopulationOverflowError,
    UnboundedSupportError,
    ValidationError,
)

INPUT_ERRORS = [
    InvalidPmfError,
    ValidationError,
    FamilyError,
    InvalidPathError,
    GridMismatchError,
    InvalidLawError,
    UnboundedSupportError,
    InvalidHorizonError,
    EmptySampleError,
    InvalidRegimeError,
    ConfigError,
]

RUNTIME_ERRORS = [PopulationOverflowError, DivergedStepError, MissingEventLogError]


class TestHierarchy:
    @pytest.mark.parametrize("error_cls", INPUT_ERRORS + RUNTIME_ERRORS)
    def test_is_catbp_error(self, error_cls):
        assert issubclass(error_cls, CatbpError)

    @pytest.mark.parametrize("error_cls", INPUT_ERRORS)
    def test_input_errors_are_value_errors(self, error_cls):
        assert issubclass(error_cls, ValueError)
        assert not issubclass(error_cls, RuntimeError)

    @pytest.mark.parametrize("error_cls", RUNTIME_ERRORS)
    def test_runtime_errors_are_runtime_errors(self, error_cls):
        assert issubclass(error_cls, RuntimeError)
        assert not issubclass(error_cls, ValueError)


class TestValidationError:
    def test_failures_are_a_tuple(self):
        failures = [ConditionCheck("alpha1_positive", False, "alpha1=0.0")]
        err = ValidationError(failures, context="params check")
        assert err.failures == tuple(failures)
        assert isinstance(err.failures, tuple)
        assert str(err) == "params check: alpha1_positive: alpha1=0.0"

    def test_message_joins_every_failure(self):
        err = ValidationError(
            [ConditionCheck("a", False, "x"), ConditionCheck("b", False, "y")]
        )
        assert str(err) == "a: x; b: y"

    def test_empty_failures_still_has_message(self):
        assert str(ValidationError([])) == "validation failed"


class TestContextualMessages:
    def test_overflow_mentions_replication(self):
        err = PopulationOverflowError(1.5, replication=7, context="simulate_pair")
        assert err.clock == 1.5
        assert err.replication == 7
        assert str(err) == "simulate_pair: population count exceeded 2**62 at t=1.5 in replication 7"

    def test_diverged_step_without_replication(self):
        err = DivergedStepError(12)
        assert str(err) == "non-finite state after step 12"

    def test_grid_mismatch_sizes(self):
        err = GridMismatchError(3, 4)
        assert (err.left, err.right) == (3, 4)
        assert "3 vs 4" in str(err)

    def test_invalid_law_keeps_parameters(self):
        err = InvalidLawError(0.5, 1.0)
        assert (err.c1, err.alpha1) == (0.5, 1.0)

    def test_invalid_regime(self):
        err = InvalidRegimeError("slow")
        assert err.regime == "slow"
        assert "'slow'" in str(err)

    def test_defaults(self):
        assert str(EmptySampleError()) == "sample is empty"
        assert str(MissingEventLogError()) == "record carries no event ledger"
        assert ConfigError("bad key").context == ""
