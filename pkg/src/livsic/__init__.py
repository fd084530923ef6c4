"""Solve and verify cohomological equations ``phi = chi o T - chi`` over
piecewise expanding interval maps.

Submodules: :mod:`~livsic.interval_maps` (maps, inverse branches, cylinders),
:mod:`~livsic.transfer_operator` (weighted transfer operators and their
eigendata), :mod:`~livsic.cohomology` (spectral and backward-orbit solvers),
:mod:`~livsic.reachability` (the partition Q and the Lebesgue number),
:mod:`~livsic.counterexample` (a smooth cocycle whose solution jumps) and
:mod:`~livsic.cli`.
"""

from .cohomology import (
    Cocycle,
    CocycleSolution,
    chi_derivative_series,
    chi_difference,
    chi_higher_derivative,
    make_coboundary,
    solve_spectral,
    verify_cocycle,
)
from .counterexample import CounterexampleSpec, build_counterexample, certify_smoothness
from .functions import Polynomial, TrigPolynomial
from .interval_maps import Branch, MapDescription, cylinders, eval_map, inverse_images, make_beta_map
from .reachability import QPartition, check_diameter_bound, lebesgue_number, q_partition
from .transfer_operator import GridFunction, SpectralData, invariant_density, spectral_data

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Cocycle",
    "CocycleSolution",
    "CounterexampleSpec",
    "GridFunction",
    "MapDescription",
    "Polynomial",
    "QPartition",
    "SpectralData",
    "TrigPolynomial",
    "build_counterexample",
    "certify_smoothness",
    "check_diameter_bound",
    "chi_derivative_series",
    "chi_difference",
    "chi_higher_derivative",
    "cylinders",
    "eval_map",
    "invariant_density",
    "inverse_images",
    "lebesgue_number",
    "make_beta_map",
    "make_coboundary",
    "q_partition",
    "solve_spectral",
    "spectral_data",
    "verify_cocycle",
]
