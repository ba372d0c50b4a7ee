"""Inhomogeneous directed last passage percolation laboratory.

Simulates DLPP with macroscopically varying exponential/geometric weights,
solves the associated Hamilton-Jacobi continuum limit with a monotone
single-sweep scheme, extracts near-optimal maximizing curves, and converts
passage fields to exclusion-process observables.
"""

__version__ = "0.1.0"

from .curve_extract import MonotoneCurve, certify, curve_energy, extract_curve
from .hjb_solver import ValueGrid, boundary_residual, closed_form_iid, solve, solve_relative
from .lattice_sim import (
    LatticeSample,
    PassageField,
    last_passage,
    optimal_path,
    run_trials,
    sample_lattice,
    scaled_field,
    trial_seed,
)
from .tasep_bridge import density_from_value, height_function, slow_bond_estimate
from .weight_field import DistributionFamily, LineSource, WeightField, geometric_nu, preset, sigma_from_mean

__all__ = [
    "__version__",
    "DistributionFamily",
    "LineSource",
    "WeightField",
    "geometric_nu",
    "preset",
    "sigma_from_mean",
    "LatticeSample",
    "PassageField",
    "sample_lattice",
    "last_passage",
    "optimal_path",
    "scaled_field",
    "run_trials",
    "trial_seed",
    "ValueGrid",
    "solve",
    "solve_relative",
    "closed_form_iid",
    "boundary_residual",
    "MonotoneCurve",
    "extract_curve",
    "curve_energy",
    "certify",
    "height_function",
    "density_from_value",
    "slow_bond_estimate",
]
