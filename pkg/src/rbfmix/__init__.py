"""Kernel-based Galerkin solver for -lap(u) + kappa*u = f on a polygon, with
Dirichlet data enforced weakly through a piecewise-polynomial boundary
multiplier, plus the analysis tooling for convergence studies.
"""

from .analysis import (ConvergenceRecord, EXACT_SOLUTIONS, ExactSolution,
                       RunRow, check_consistency, estimate_infsup, fit_rate,
                       get_exact_solution, h1_error, interpolate_native,
                       interpolation_rate_study, l2_boundary_error, with_kappa)
from .assembly import (ParameterRecord, SaddleSystem, assemble_A, assemble_B,
                       assemble_F, assemble_G, assemble_system, dump_system,
                       neighbor_pairs)
from .config import RunConfig, load_config, validate_config
from .errors import (ConditioningError, ConfigurationError, NumericalError,
                     SingularSystemError)
from .geometry import (BoundaryElement, BoundaryMesh, CenterSet, Polygon,
                       fill_distance, generate_grid_centers,
                       generate_interior_centers, l_shape, make_center_set,
                       partition_boundary, separation_distance, unit_square)
from .kernels import WendlandKernel, make_kernel
from .multiplier_space import MultiplierSpace, project_l2
from .quadrature import (DomainQuadrature, QuadRule1D, gauss_rule,
                         integrate_boundary, integrate_domain)
from .solver import (MixedSolution, evaluate_grad_u, evaluate_lambda,
                     evaluate_u, load_solution, save_solution, solve)

__version__ = "0.1.0"

__all__ = [
    "BoundaryElement", "BoundaryMesh", "CenterSet", "ConditioningError",
    "ConfigurationError", "ConvergenceRecord", "DomainQuadrature",
    "EXACT_SOLUTIONS", "ExactSolution", "MixedSolution", "MultiplierSpace",
    "NumericalError", "ParameterRecord", "Polygon", "QuadRule1D", "RunConfig",
    "RunRow", "SaddleSystem", "SingularSystemError", "WendlandKernel",
    "assemble_A", "assemble_B", "assemble_F", "assemble_G", "assemble_system",
    "check_consistency", "dump_system", "estimate_infsup", "evaluate_grad_u",
    "evaluate_lambda", "evaluate_u", "fill_distance", "fit_rate",
    "gauss_rule", "generate_grid_centers", "generate_interior_centers",
    "get_exact_solution", "h1_error", "integrate_boundary", "integrate_domain",
    "interpolate_native", "interpolation_rate_study", "l2_boundary_error",
    "l_shape", "load_config", "load_solution", "make_center_set",
    "make_kernel", "neighbor_pairs", "partition_boundary", "project_l2",
    "save_solution", "separation_distance", "solve", "unit_square",
    "validate_config", "with_kappa",
]
