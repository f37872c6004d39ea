# Engine model layer: simulators on top of catbp_core's value types.
# Parameters, the Skorohod map and the stationary law live in catbp_core and
# must be imported from there directly.

from .branching import (
    BpPathRecord,
    EventLedger,
    EventLog,
    LatticeState,
    MartingaleDiagnostics,
    martingale_diagnostics,
    occupation_sampler,
    reflection_rate,
    simulate_pair,
    simulate_replications,
)
from .diffusion import (
    DEFAULT_DT,
    ReflectedPathSample,
    SdeGrid,
    TerminalEnsemble,
    averaged_moments,
    exponential_moment_samples,
    integrate_averaged,
    integrate_averaged_terminal,
    integrate_system,
    integrate_terminal,
)

__all__ = [
    "BpPathRecord",
    "EventLedger",
    "EventLog",
    "LatticeState",
    "MartingaleDiagnostics",
    "martingale_diagnostics",
    "occupation_sampler",
    "reflection_rate",
    "simulate_pair",
    "simulate_replications",
    "DEFAULT_DT",
    "ReflectedPathSample",
    "SdeGrid",
    "TerminalEnsemble",
    "averaged_moments",
    "exponential_moment_samples",
    "integrate_averaged",
    "integrate_averaged_terminal",
    "integrate_system",
    "integrate_terminal",
]
