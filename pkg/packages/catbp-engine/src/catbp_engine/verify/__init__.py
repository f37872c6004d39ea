# Verification layer: distances, reports and the Monte Carlo studies.

from .report import MetricRow, Rule, StudyReport
from .statistics import (
    EmpiricalSample,
    MomentEstimate,
    ergodic_average,
    ks_critical_value,
    ks_one_sample,
    ks_two_sample,
    wasserstein1,
)
from .studies import (
    DEFAULT_LIMIT,
    check_family_matches,
    study_averaging,
    study_diffusion_limit,
    study_echeverria,
    study_martingale,
    study_stationary,
)

__all__ = [
    "MetricRow",
    "Rule",
    "StudyReport",
    "EmpiricalSample",
    "MomentEstimate",
    "ergodic_average",
    "ks_critical_value",
    "ks_one_sample",
    "ks_two_sample",
    "wasserstein1",
    "DEFAULT_LIMIT",
    "check_family_matches",
    "study_averaging",
    "study_diffusion_limit",
    "study_echeverria",
    "study_martingale",
    "study_stationary",
]
