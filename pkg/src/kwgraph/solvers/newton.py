"""Damped Newton on ``F(u) = Δᵐu − c + h eᵘ``."""

from __future__ import annotations

import numpy as np

from ..errors import (
    DegenerateLimit,
    LineSearchFailed,
    MaxIterations,
    NonFinite,
    SingularJacobian,
)
from ..graph import Graph, VertexFunction, values_of
from ..numerics import poly_laplacian_matrix
from ..operators import BALANCE_TOL, Problem, energy_array, h_exp, imbalance
from .config import Method, SolveReport, SolverConfig

MAX_HALVINGS = 60
STALL_WINDOW = 25


def newton_array(
    g: Graph,
    m: int,
    c: float,
    h: np.ndarray,
    u0: np.ndarray,
    cfg: SolverConfig,
    Lm: np.ndarray | None = None,
) -> tuple[np.ndarray, float, list[dict]]:
    if Lm is None:
        Lm = poly_laplacian_matrix(g, m)

    def F(u):
        with np.errstate(invalid="ignore"):
            return Lm @ u - c + h_exp(h, u)

    def accept(u):
        if imbalance(Lm @ u, c, h_exp(h, u)) > BALANCE_TOL:
            raise DegenerateLimit(
                f"residual {norm:.3e} reached at min u = {float(np.min(u)):.4g} "
                "where no term of the equation balances another"
            )
        return u, norm, trace

    u = np.array(u0, dtype=float)
    Fu = F(u)
    if not np.all(np.isfinite(Fu)):
        raise NonFinite("residual at the initial guess is not finite")
    norm = float(np.max(np.abs(Fu)))
    trace = [{"iteration": 0, "residual": norm}]
    for it in range(1, cfg.max_iterations + 1):
        if norm <= cfg.residual_tol:
            return accept(u)
        J = Lm + np.diag(h_exp(h, u))
        singular = False
        try:
            du = np.linalg.solve(J, -Fu)
        except np.linalg.LinAlgError:
            singular = True
            du = np.linalg.lstsq(J, -Fu, rcond=None)[0]
        if not np.all(np.isfinite(du)):
            raise NonFinite(f"Newton step is not finite at iteration {it}")
        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = u + t * du
            Ft = F(trial)
            nt = float(np.max(np.abs(Ft))) if np.all(np.isfinite(Ft)) else np.inf
            if nt < norm:
                break
            t *= cfg.newton_damping
        else:
            if singular or np.linalg.cond(J) > 1e14:
                raise SingularJacobian(
                    f"line search stalled at residual {norm:.3e} with a singular Jacobian"
                )
            raise LineSearchFailed(f"line search stalled at residual {norm:.3e}")
        step = float(np.max(np.abs(trial - u)))
        u, Fu, norm = trial, Ft, nt
        trace.append({"iteration": it, "residual": norm, "step": t})
        if norm > cfg.residual_tol:
            if step <= cfg.step_tol * (1.0 + float(np.max(np.abs(u)))):
                raise LineSearchFailed(f"Newton stagnated at residual {norm:.3e}")
            # creeping with tiny damped steps: no 1% gain over the window
            if it >= STALL_WINDOW and norm > 0.99 * trace[it - STALL_WINDOW]["residual"]:
                raise LineSearchFailed(f"Newton made no progress in {STALL_WINDOW} "
                                       f"iterations (residual {norm:.3e})")
    if norm <= cfg.residual_tol:
        return accept(u)
    raise MaxIterations(f"Newton did not converge in {cfg.max_iterations} iterations "
                        f"(residual {norm:.3e})")


def solve_newton(
    g: Graph, p: Problem, init: VertexFunction, cfg: SolverConfig | None = None
) -> SolveReport:
    """Damped Newton with backtracking on ``‖F‖∞``.

    The Jacobian is ``Δᵐ + diag(h eᵘ)``; each step is halved (by
    ``cfg.newton_damping``) until the sup-norm residual decreases.
    """
    cfg = cfg or SolverConfig()
    h = values_of(g, p.h)
    u, norm, trace = newton_array(g, p.m, p.c, h, values_of(g, init), cfg)
    return SolveReport(
        solution=g.function(u),
        residual_inf=norm,
        iterations=len(trace) - 1,
        method=Method.NEWTON,
        energy=energy_array(g, p.m, p.c, u),
        trace=trace,
    )
