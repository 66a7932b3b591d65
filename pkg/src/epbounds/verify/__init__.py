"""Verification engines: sweeps, crossings, identities and Mertens sums."""

from .identities import IDENTITIES, IdentityResidual, identity_residual, identity_residuals
from .mertens import MertensProducts, PrimePowerTail, a1_values, mertens_estimate, mertens_products, prime_power_tail
from .report import CrossingResult, MertensEstimate, VerificationReport, Witness, reports_to_csv
from .sweeps import (
    find_crossing,
    sweep_pi_lower,
    sweep_pi_upper,
    sweep_prime_gap,
    sweep_rh,
    sweep_theta,
    verify_bound,
)

__all__ = [
    "IDENTITIES",
    "CrossingResult",
    "IdentityResidual",
    "MertensProducts",
    "PrimePowerTail",
    "MertensEstimate",
    "VerificationReport",
    "Witness",
    "a1_values",
    "find_crossing",
    "identity_residual",
    "identity_residuals",
    "mertens_estimate",
    "mertens_products",
    "prime_power_tail",
    "reports_to_csv",
    "sweep_pi_lower",
    "sweep_pi_upper",
    "sweep_prime_gap",
    "sweep_rh",
    "sweep_theta",
    "verify_bound",
]
