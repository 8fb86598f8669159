from .config import Method, Multipliers, SolveReport, SolverConfig
from .dispatch import continuation, multistart_newton, solve
from .monotone import (
    MonotoneState,
    UpperSolutionParams,
    construct_upper_solution,
    construct_upper_solution_nonpositive_h,
    is_upper_solution,
    lower_solution_constant,
    monotone_iterate,
)
from .newton import solve_newton
from .variational import minimize_variational

__all__ = [
    "Method",
    "MonotoneState",
    "Multipliers",
    "SolveReport",
    "SolverConfig",
    "UpperSolutionParams",
    "construct_upper_solution",
    "construct_upper_solution_nonpositive_h",
    "continuation",
    "is_upper_solution",
    "lower_solution_constant",
    "minimize_variational",
    "monotone_iterate",
    "multistart_newton",
    "solve",
    "solve_newton",
]
