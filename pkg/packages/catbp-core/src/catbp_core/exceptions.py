"""Custom exceptions for the catalyst–reactant toolkit.

Every error raised by ``catbp-core`` (and the engine layered on top of it)
subclasses :class:`CatbpError`, so a single ``except CatbpError`` catches the
whole family. Contract violations on inputs *also* subclass
:class:`ValueError`; failures that only show up while a simulation runs
*also* subclass :class:`RuntimeError`. The CLI maps the two halves onto
its exit codes (1 and 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterable


def _with_context(message: str, context: str) -> str:
    return f"{context}: {message}" if context else message


class CatbpError(Exception):
    """Base class for every toolkit error.

    Defines no ``__init__`` so a subclass's ``super().__init__(message)``
    resolves through the MRO to :class:`ValueError` or
    :class:`RuntimeError`, storing the message the way callers expect.
    """


@dataclass(frozen=True, slots=True)
class ConditionCheck:
    """One named standing condition and whether it held.

    Attributes:
        name: Short machine-readable identifier, e.g. ``"alpha1_positive"``.
        passed: Whether the condition holds.
        detail: Human-readable statement with the offending values.
    """

    name: str
    passed: bool
    detail: str = ""


class InvalidPmfError(CatbpError, ValueError):
    """Raised when an offspring law is not a finite probability vector."""

    def __init__(self, message: str, context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context


class ValidationError(CatbpError, ValueError):
    """Raised when a parameterization violates one or more standing conditions.

    All failed checks are aggregated rather than reporting the first one,
    so a config file can be fixed in a single pass.
    """

    def __init__(self, failures: Iterable[ConditionCheck], context: str = "") -> None:
        """Initialize the ValidationError.

        Args:
            failures: The failed :class:`ConditionCheck` entries. Coerced to
                a tuple for diagnostics.
            context: Optional free-form context appended to the message.
        """
        failed = tuple(failures)
        base = "; ".join(f"{c.name}: {c.detail}" for c in failed) or "validation failed"
        super().__init__(_with_context(base, context))
        self.failures = failed
        self.context = context


class FamilyError(CatbpError, ValueError):
    """Raised for an empty parameter family or one whose limit constants disagree."""

    def __init__(self, message: str, context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context


class InvalidPathError(CatbpError, ValueError):
    """Raised when a path's grid is malformed or it starts below the boundary."""

    def __init__(self, message: str, context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context


class GridMismatchError(CatbpError, ValueError):
    """Raised when two paths that must share a grid do not."""

    def __init__(self, left: int, right: int, context: str = "") -> None:
        """Initialize the GridMismatchError.

        Args:
            left: Node count of the first path.
            right: Node count of the second path.
            context: Optional free-form context appended to the message.
        """
        base = f"paths are not on the same grid ({left} vs {right} nodes)"
        super().__init__(_with_context(base, context))
        self.left = left
        self.right = right
        self.context = context


class InvalidLawError(CatbpError, ValueError):
    """Raised when the stationary law is requested outside ``c1 < 0, alpha1 > 0``."""

    def __init__(self, c1: float, alpha1: float, context: str = "") -> None:
        base = f"stationary law needs c1 < 0 and alpha1 > 0, got c1={c1!r}, alpha1={alpha1!r}"
        super().__init__(_with_context(base, context))
        self.c1 = c1
        self.alpha1 = alpha1
        self.context = context


class UnboundedSupportError(CatbpError, ValueError):
    """Raised when a test function does not vanish beyond a finite radius."""

    def __init__(self, message: str, context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context


class InvalidHorizonError(CatbpError, ValueError):
    """Raised for non-positive horizons, gaps, step sizes or burn-in windows."""

    def __init__(self, message: str, context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context


class EmptySampleError(CatbpError, ValueError):
    """Raised when a statistic is requested on an empty sample."""

    def __init__(self, message: str = "sample is empty", context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context


class InvalidRegimeError(CatbpError, ValueError):
    """Raised when an averaging study names an unknown regime."""

    def __init__(self, regime: object, context: str = "") -> None:
        base = f"unknown averaging regime {regime!r} (expected 'diffusion' or 'branching')"
        super().__init__(_with_context(base, context))
        self.regime = regime
        self.context = context


class ConfigError(CatbpError, ValueError):
    """Raised on unknown sections/keys or unparsable values in a run config."""

    def __init__(self, message: str, context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context


class PopulationOverflowError(CatbpError, RuntimeError):
    """Raised when a lattice count leaves the safe integer range (2**62)."""

    def __init__(self, clock: float, replication: int | None = None, context: str = "") -> None:
        """Initialize the PopulationOverflowError.

        Args:
            clock: Scaled time at which the overflow was detected.
            replication: Replication index, when known.
            context: Optional free-form context appended to the message.
        """
        where = f" in replication {replication}" if replication is not None else ""
        base = f"population count exceeded 2**62 at t={clock:.6g}{where}"
        super().__init__(_with_context(base, context))
        self.clock = clock
        self.replication = replication
        self.context = context


class DivergedStepError(CatbpError, RuntimeError):
    """Raised when an Euler–Maruyama step produces a non-finite state."""

    def __init__(self, step: int, replication: int | None = None, context: str = "") -> None:
        where = f" in replication {replication}" if replication is not None else ""
        base = f"non-finite state after step {step}{where}"
        super().__init__(_with_context(base, context))
        self.step = step
        self.replication = replication
        self.context = context


class MissingEventLogError(CatbpError, RuntimeError):
    """Raised when exact path functionals are requested from grid samples only."""

    def __init__(self, message: str = "record carries no event ledger", context: str = "") -> None:
        super().__init__(_with_context(message, context))
        self.context = context
