"""Desk-scale verification of the P5 almost-prime bound for [p^(1/gamma)].

Submodules:

    params    -- sieve parameters and the two window inequalities
    lemmas    -- certifying subset selectors for the 6/7-variable window lemmas
    search    -- counterexample search and selector sweeps
    integrals -- main-term and nested simplex integrals
    bound     -- final bracket assembly, margin tables, threshold scan
    census    -- exact floor roots, Omega census, sieve weights
    cli       -- command-line entry point
"""

from p5verify.errors import (
    DomainError,
    InvalidPointError,
    PrecisionExhaustedError,
    ProofGapError,
    ResourceLimitError,
)
from p5verify.params import SieveParams, WindowCheckReport, check_windows, derive_params, window_threshold

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "InvalidPointError",
    "PrecisionExhaustedError",
    "ProofGapError",
    "ResourceLimitError",
    "SieveParams",
    "WindowCheckReport",
    "check_windows",
    "derive_params",
    "window_threshold",
]
