"""Gap probabilities of the Airy process on unions of intervals.

Numerical Fredholm determinants together with the spectral data of the
large-gap expansion ``c r^3 - (3g/8) ln r + ln theta(nu(r)) + C``.
"""

from ._backend import BACKEND
from .asympt import (
    ExpansionTerms,
    IntervalConfig,
    expansion_terms,
    is_admissible,
    leading_coeff,
    nu_vector,
    predicted_logF,
    solve_system,
    solve_x0_g1,
)
from .errors import AirygapError, DomainError, NumericalError
from .fredholm import NystromResult, gap_probability_scaled, log_gap_probability
from .riemann import BranchPoints, SurfaceData
from .verify import VerificationReport, run_verification

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AirygapError",
    "BranchPoints",
    "DomainError",
    "ExpansionTerms",
    "IntervalConfig",
    "NumericalError",
    "NystromResult",
    "SurfaceData",
    "VerificationReport",
    "expansion_terms",
    "gap_probability_scaled",
    "is_admissible",
    "leading_coeff",
    "log_gap_probability",
    "nu_vector",
    "predicted_logF",
    "run_verification",
    "solve_system",
    "solve_x0_g1",
]
