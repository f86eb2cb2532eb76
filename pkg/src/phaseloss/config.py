"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    normalization: float = 1e-12
    hermitian: float = 1e-12
    finite_difference: float = 1e-6
    orthonormal: float = 1e-8
    # lambda_i + lambda_j below this is treated as kernel in the SLD solve
    sld_cutoff: float = 1e-12
    sld_residual: float = 1e-8
    min_outcome_probability: float = 1e-14
    simplex_truncation: float = 1e-12
    # dense oracle photon-number budget
    dense_budget: int = 12


TOL = Tolerances()
