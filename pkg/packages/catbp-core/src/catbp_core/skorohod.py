"""One-dimensional Skorohod map with reflection at 1, on discretized paths.

For ``ψ`` with ``ψ(0) ≥ 1`` the map returns ``φ = ψ + η`` with

    η(t) = 1 − min_{s ≤ t} (ψ(s) ∧ 1),

the smallest nondecreasing push keeping ``φ ≥ 1``. Paths are only ever
evaluated at their own nodes. A linear segment attains its minimum at an
endpoint, so the running minimum over nodes is exact for both
:class:`~catbp_core.types.PathKind` readings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import GridMismatchError, InvalidPathError
from .types import PathKind

#: Node-wise slack allowed on complementarity for piecewise-linear inputs.
LINEAR_CONTACT_TOLERANCE = 1e-9


def _frozen(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, slots=True, eq=False)
class Path:
    """Time-stamped sample path.

    Attributes:
        times: Strictly increasing node times, starting at 0.
        values: Path value at each node.
        kind: How the path is read between nodes.

    Raises:
        InvalidPathError: If the arrays are not one-dimensional and of equal
            nonzero length, ``times[0] != 0``, the times are not strictly
            increasing, or a value is not finite.
    """

    times: np.ndarray
    values: np.ndarray
    kind: PathKind = PathKind.CONSTANT

    def __post_init__(self) -> None:
        times = _frozen(self.times)
        values = _frozen(self.values)
        if times.ndim != 1 or values.ndim != 1 or times.size != values.size or times.size == 0:
            raise InvalidPathError(
                f"times and values must be 1-D of equal nonzero length, got {times.shape} and {values.shape}"
            )
        if times[0] != 0.0:
            raise InvalidPathError(f"path must start at time 0, got {times[0]!r}")
        if np.any(np.diff(times) <= 0):
            raise InvalidPathError("times are not strictly increasing")
        if not np.all(np.isfinite(values)):
            raise InvalidPathError("path has non-finite values")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", PathKind(self.kind))

    def __len__(self) -> int:
        return self.times.size

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def with_values(self, values: np.ndarray) -> Path:
        """Same grid and kind, new values."""
        return Path(self.times, values, self.kind)

    def same_grid(self, other: Path) -> bool:
        return self.times.size == other.times.size and bool(np.array_equal(self.times, other.times))


def skorohod_reflect(psi: Path) -> tuple[Path, Path]:
    """Reflect ``psi`` at 1.

    Args:
        psi: Input path in ``D₁`` (``psi.values[0] >= 1``).

    Returns:
        ``(phi, eta)`` on the grid of ``psi``: the reflected path
        ``phi ≥ 1`` and the nondecreasing reflection term with
        ``eta(0) = 0``.

    Raises:
        InvalidPathError: If ``psi`` starts below the boundary.
    """
    if psi.values[0] < 1.0:
        raise InvalidPathError(f"path starts at {psi.values[0]!r} < 1", context="skorohod_reflect")
    running = np.minimum.accumulate(np.minimum(psi.values, 1.0))
    # (ψ − min) + 1 lands on exactly 1.0 wherever ψ sets a new minimum.
    phi = (psi.values - running) + 1.0
    eta = 1.0 - running
    return psi.with_values(phi), psi.with_values(eta)


def lipschitz_gap(psi: Path, psi_tilde: Path, horizon: float) -> tuple[float, float]:
    """Both sides of the factor-2 Lipschitz bound of the Skorohod map.

    Returns:
        ``(lhs, rhs)`` with ``lhs = sup |Γψ − Γψ̃|`` and
        ``rhs = 2 sup |ψ − ψ̃|`` over nodes ``t ≤ horizon``; ``lhs ≤ rhs``.

    Raises:
        GridMismatchError: If the two paths are not on the same grid.
        InvalidPathError: If either path starts below the boundary.
    """
    if not psi.same_grid(psi_tilde):
        raise GridMismatchError(len(psi), len(psi_tilde), context="lipschitz_gap")
    mask = psi.times <= horizon
    phi, _ = skorohod_reflect(psi)
    phi_tilde, _ = skorohod_reflect(psi_tilde)
    lhs = float(np.max(np.abs(phi.values[mask] - phi_tilde.values[mask]), initial=0.0))
    rhs = 2.0 * float(np.max(np.abs(psi.values[mask] - psi_tilde.values[mask]), initial=0.0))
    return lhs, rhs


def contact_violations(phi: Path, eta: Path) -> np.ndarray:
    """Nodes where ``eta`` grows although ``phi`` is away from the boundary.

    For piecewise-constant paths an increment of ``eta`` into node ``k``
    requires ``phi[k] == 1``. For piecewise-linear paths it requires
    ``min(phi[k-1], phi[k]) <= 1 + LINEAR_CONTACT_TOLERANCE``.

    Returns:
        Indices ``k`` (``k ≥ 1``) of violating nodes; empty when the pair
        satisfies complementarity.
    """
    grows = np.flatnonzero(np.diff(eta.values) > 0) + 1
    if phi.kind is PathKind.CONSTANT:
        touching = phi.values[grows] == 1.0
    else:
        lows = np.minimum(phi.values[grows - 1], phi.values[grows])
        touching = lows <= 1.0 + LINEAR_CONTACT_TOLERANCE
    return grows[~touching]
