"""Bergman metric, its Ricci-modified companion (n+1)T - Ric, and completeness probes
on model domains, computed through finite reproducing-kernel truncations."""

__version__ = "0.1.0"

from .domains import (DomainSpec, annulus, approach_sequence, ball, custom_series, disc,
                      polydisc, punctured_disc)
from .errors import (DegenerateKernelError, DependentTupleError, DomainError, NotPositiveDefiniteError,
                     NumericalFailure, OptimizerError)
from .rkhs import BasisSpec, KernelJet, build_basis, kernel_eval, kernel_jet
from .metrics import bergman_tensor, ricci_tensor, tilde_tensor, vector_length
from .wedge import WedgeVector, gram_determinant, is_decomposable, plucker_residual, wedge_of
from .criterion import (FunctionVector, fraction_sup_probe, jet_matrix_det, norm_identity_residual,
                        tilde_ratio)
from .geodesy import Path, completeness_probe, distance_upper, path_length, radial_distance
from .green import GreenSpec, extension_constant, green_value, hyperconvexity_bound, sublevel_volume

__all__ = [
    "DomainSpec", "annulus", "approach_sequence", "ball", "custom_series", "disc", "polydisc",
    "punctured_disc", "DegenerateKernelError", "DependentTupleError", "DomainError",
    "NotPositiveDefiniteError", "NumericalFailure", "OptimizerError", "BasisSpec", "KernelJet",
    "build_basis", "kernel_eval", "kernel_jet", "bergman_tensor", "ricci_tensor", "tilde_tensor",
    "vector_length", "WedgeVector", "gram_determinant", "is_decomposable", "plucker_residual",
    "wedge_of", "FunctionVector", "fraction_sup_probe", "jet_matrix_det", "norm_identity_residual",
    "tilde_ratio", "Path", "completeness_probe", "distance_upper", "path_length", "radial_distance",
    "GreenSpec", "extension_constant", "green_value", "hyperconvexity_bound", "sublevel_volume",
]
