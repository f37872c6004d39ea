"""Enum types shared across the catbp packages.

Values are the strings used in config files and CSV/JSON output, so
``PathKind("linear")`` and ``Regime("branching")`` parse user input directly.
"""

from enum import StrEnum


class PathKind(StrEnum):
    """How a sampled path is read between its nodes."""

    CONSTANT = "constant"
    """Piecewise constant, right-continuous (jump-process paths)."""

    LINEAR = "linear"
    """Piecewise linear between nodes (discretized diffusion paths)."""


class Regime(StrEnum):
    """Which fast system an averaging study simulates."""

    DIFFUSION = "diffusion"
    BRANCHING = "branching"
