"""Secure coexistence of a primary wiretap link and a cognitive secondary user.

Rates, outer bounds and optimizers for Gaussian and finite-alphabet models.
"""

from .channel import ChannelGains, Geometry, gains_from_geometry, standardize
from .errors import DomainError, InfeasibleError, PreconditionError, SecureCRError, UsageError
from .kernels import BACKEND
from .optimizer import Budgets, OptProblem, OptResult, Scheme, Status, solve
from .schemes import (RateReport, Scenario, SchemeParams, baseline_secrecy_rate, dpc_rate,
                      eta1_min, no_dpc_rate, single_phase_rate)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Budgets", "ChannelGains", "DomainError", "Geometry", "InfeasibleError", "OptProblem",
    "OptResult", "PreconditionError", "RateReport", "Scenario", "Scheme", "SchemeParams",
    "SecureCRError", "Status", "UsageError", "baseline_secrecy_rate", "dpc_rate", "eta1_min",
    "gains_from_geometry", "no_dpc_rate", "single_phase_rate", "solve", "standardize",
]
