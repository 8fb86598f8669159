"""Solvers for the equation ``Δᵐu = c − h·eᵘ`` on finite weighted graphs."""

from .errors import KWError
from .feasibility import FeasibilityVerdict, check, seed_B1, seed_B2
from .graph import Graph, VertexFunction, build_graph, is_connected
from .numerics import SpectralInfo, solve_poisson_mean_zero, solve_shifted, spectral_gap
from .operators import (
    Problem,
    average,
    energy,
    gamma,
    grad_m_norm,
    grad_norm,
    integrate,
    laplacian,
    poly_laplacian,
    residual,
    vol,
)
from .solvers import (
    SolveReport,
    SolverConfig,
    construct_upper_solution,
    construct_upper_solution_nonpositive_h,
    lower_solution_constant,
    minimize_variational,
    monotone_iterate,
    solve,
    solve_newton,
)
from .threshold import ThresholdEstimate, estimate_c_minus

__version__ = "0.1.0"
