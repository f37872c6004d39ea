"""Reproducible random streams and ordered replication fan-out.

Every replication owns a Philox generator seeded from
``SeedSequence(master_seed, spawn_key=(lane, replication_index))``. Philox is
counter-based, and each kernel consumes its stream in a fixed per-step,
per-coordinate order, so draw ``j`` of a replication is a pure function of
``(master_seed, lane, replication_index, j)`` no matter which worker thread
runs it or in what order.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")

#: Lanes separate streams that share a master seed and replication index.
LANE_BRANCHING = 0
LANE_DIFFUSION = 1
LANE_AVERAGED = 2
LANE_STATIONARY = 3

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True, slots=True)
class RngStream:
    """Address of one replication's random stream.

    Attributes:
        master_seed: 64-bit run seed.
        replication_index: Replication number within the run.
        lane: Which simulator family the stream feeds.
    """

    master_seed: int
    replication_index: int
    lane: int = LANE_BRANCHING

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= _SEED_MASK:
            raise ValueError(f"master seed must be an unsigned 64-bit integer, got {self.master_seed!r}")
        if self.replication_index < 0:
            raise ValueError(f"replication index must be nonnegative, got {self.replication_index!r}")

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.lane, self.replication_index))
        return np.random.Generator(np.random.Philox(seq))


def derive_seed(master_seed: int, *tags: int) -> int:
    """Independent 64-bit seed for a sub-run (study repeat, sweep point, …)."""
    seq = np.random.SeedSequence([master_seed & _SEED_MASK, *tags])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def default_threads() -> int:
    return os.cpu_count() or 1


def run_replications(task: Callable[[int], T], reps: int, threads: int | None = None) -> list[T]:
    """Run ``task(i)`` for ``i = 0..reps-1`` and return results in index order.

    Kernels release the GIL, so a thread pool gives real parallelism without
    pickling parameters into worker processes. The result order never
    depends on scheduling.
    """
    if reps < 1:
        raise ValueError(f"replication count must be positive, got {reps!r}")
    workers = min(threads or default_threads(), reps)
    logger.debug("running %d replications on %d thread(s)", reps, workers)
    if workers == 1:
        return [task(i) for i in range(reps)]
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="catbp") as pool:
        return list(pool.map(task, range(reps)))
