"""Tests for stream addressing and ordered replication fan-out."""

import threading

import numpy as np
import pytest

from catbp_engine.rng import (
    LANE_BRANCHING,
    LANE_DIFFUSION,
    RngStream,
    derive_seed,
    run_replications,
)


class TestRngStream:
    def test_same_address_same_draws(self):
        first = RngStream(7, 3).generator().random(8)
        second = RngStream(7, 3).generator().random(8)
        np.testing.assert_array_equal(first, second)

    @pytest.mark.parametrize(
        "other",
        [RngStream(7, 4), RngStream(8, 3), RngStream(7, 3, LANE_DIFFUSION)],
    )
    def test_different_address_different_draws(self, other):
        base = RngStream(7, 3, LANE_BRANCHING).generator().random(8)
        assert not np.array_equal(base, other.generator().random(8))

    def test_generator_is_philox(self):
        assert isinstance(RngStream(1, 0).generator().bit_generator, np.random.Philox)

    @pytest.mark.parametrize("seed,index", [(-1, 0), (2**64, 0), (0, -1)])
    def test_rejects_bad_address(self, seed, index):
        with pytest.raises(ValueError):
            RngStream(seed, index)


class TestDeriveSeed:
    def test_deterministic_and_tag_sensitive(self):
        assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
        assert derive_seed(5, 1, 2) != derive_seed(5, 2, 1)
        assert 0 <= derive_seed(5) < 2**64


class TestRunReplications:
    def test_results_in_index_order(self):
        assert run_replications(lambda i: i * i, 50, threads=8) == [i * i for i in range(50)]

    def test_thread_count_does_not_change_results(self):
        def task(i):
            return RngStream(11, i).generator().standard_normal()

        assert run_replications(task, 40, threads=1) == run_replications(task, 40, threads=6)

    def test_single_worker_runs_inline(self):
        names = run_replications(lambda i: threading.current_thread().name, 3, threads=1)
        assert set(names) == {threading.current_thread().name}

    def test_rejects_zero_reps(self):
        with pytest.raises(ValueError):
            run_replications(lambda i: i, 0)
