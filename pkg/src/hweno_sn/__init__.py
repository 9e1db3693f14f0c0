"""HWENO fast-sweeping discrete-ordinates transport solver in 1D and 2D."""

from .hweno import (InterfaceSide, MaterialStencil, StencilData, big_value, candidate_values,
                    heterogeneity_factors, nonlinear_weights, reconstruct, smoothness_indicators)
from .oracles import (DiffusionProblem, assemble_global, diffusion_boundary_values, diffusion_exact_constant,
                      diffusion_solve, direct_solve)
from .problems import Mesh1D, Mesh2D, ProblemSpec, catalog, cell_moments, exact_solution, with_epsilon
from .quadrature import AngularQuadrature1D, AngularQuadrature2D, gauss_legendre, moment, product_quadrature
from .report import Divergence, NumericalBreakdown, RunReport, error_norms, field_hash, order_table
from .sweep1d import ghost_fill, local_solve, solve_1d
from .sweep2d import local_solve4, reconstruct_face_moments, relax, solve_2d

__version__ = "0.1.0"

__all__ = [
    "AngularQuadrature1D", "AngularQuadrature2D", "DiffusionProblem", "Divergence", "InterfaceSide",
    "MaterialStencil", "Mesh1D", "Mesh2D", "NumericalBreakdown", "ProblemSpec", "RunReport", "StencilData",
    "assemble_global", "big_value", "candidate_values", "catalog", "cell_moments", "diffusion_boundary_values",
    "diffusion_exact_constant", "diffusion_solve", "direct_solve", "error_norms", "exact_solution", "field_hash",
    "gauss_legendre", "ghost_fill", "heterogeneity_factors", "local_solve", "local_solve4", "moment",
    "nonlinear_weights", "order_table", "product_quadrature", "reconstruct", "reconstruct_face_moments", "relax",
    "smoothness_indicators", "solve_1d", "solve_2d", "with_epsilon",
]
