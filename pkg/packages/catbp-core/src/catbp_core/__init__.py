"""Value types and closed-form numerics for catalyst–reactant branching models.

Public API: consumers can ``from catbp_core import OffspringPmf, StationaryLaw, …``
without knowing the internal module layout.
"""

from .types import PathKind, Regime
from .offspring import (
    AliasTable,
    OffspringPmf,
    near_critical_pmf,
    offspring_mgf,
    offspring_moments,
)
from .params import (
    BranchingParams,
    DiffusionParams,
    FamilyReport,
    FamilyRow,
    ValidationReport,
    check_conditions,
    family_check,
    matched_branching_params,
    offspring_tail,
    validate,
)
from .skorohod import Path, contact_violations, lipschitz_gap, skorohod_reflect
from .stationary import (
    StationaryLaw,
    TestFunction,
    averaged_coefficients,
    default_test_library,
    echeverria_residual,
    mean_mX,
    mean_mX_quadrature,
    residual_table,
    sample,
    theta,
)
from .exceptions import (
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

__version__ = "0.1.0"

__all__ = [
    "PathKind",
    "Regime",
    "AliasTable",
    "OffspringPmf",
    "near_critical_pmf",
    "offspring_mgf",
    "offspring_moments",
    "BranchingParams",
    "DiffusionParams",
    "FamilyReport",
    "FamilyRow",
    "ValidationReport",
    "check_conditions",
    "family_check",
    "matched_branching_params",
    "offspring_tail",
    "validate",
    "Path",
    "contact_violations",
    "lipschitz_gap",
    "skorohod_reflect",
    "StationaryLaw",
    "TestFunction",
    "averaged_coefficients",
    "default_test_library",
    "echeverria_residual",
    "mean_mX",
    "mean_mX_quadrature",
    "residual_table",
    "sample",
    "theta",
    "CatbpError",
    "ConditionCheck",
    "ConfigError",
    "DivergedStepError",
    "EmptySampleError",
    "FamilyError",
    "GridMismatchError",
    "InvalidHorizonError",
    "InvalidLawError",
    "InvalidPathError",
    "InvalidPmfError",
    "InvalidRegimeError",
    "MissingEventLogError",
    "PopulationOverflowError",
    "UnboundedSupportError",
    "ValidationError",
]
