"""Route a problem to the solver its sign of ``c`` calls for."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..errors import (
    BracketingFailed,
    Infeasible,
    InvalidProblem,
    MaxIterations,
    MonotoneStalled,
    NoSolutionFound,
    NoUpperSolutionFound,
    PreconditionFailed,
    SolverError,
)
from ..feasibility import Status, check, seed_B1, seed_B2, sign_reasons
from ..graph import Graph, VertexFunction, values_of
from ..numerics import poly_laplacian_matrix
from ..operators import (
    BALANCE_TOL,
    Problem,
    energy_array,
    h_exp,
    imbalance,
    poly_laplacian_array,
    residual_array,
)
from .config import Method, SolveReport, SolverConfig
from .monotone import (
    construct_upper_solution,
    construct_upper_solution_nonpositive_h,
    is_upper_solution,
    lower_solution_constant,
    monotone_iterate,
)
from .newton import newton_array
from .variational import minimize_variational

METHODS = ("auto", "newton", "variational", "monotone")
RESTART_EVERY = 50


def _newton_report(g: Graph, p: Problem, u: np.ndarray, iterations: int, trace, notes):
    return SolveReport(
        solution=g.function(u),
        residual_inf=float(np.max(np.abs(residual_array(g, p.m, p.c, values_of(g, p.h), u)))),
        iterations=iterations,
        method=Method.NEWTON,
        energy=energy_array(g, p.m, p.c, u),
        trace=trace,
        notes=list(notes),
    )


def try_newton(g: Graph, p: Problem, u0: np.ndarray, cfg: SolverConfig, Lm=None):
    """Newton from ``u0``; ``None`` instead of an exception on failure."""
    try:
        return newton_array(g, p.m, p.c, values_of(g, p.h), u0, cfg, Lm)
    except SolverError:
        return None


def default_guess(g: Graph, p: Problem) -> np.ndarray:
    """Seed of the constraint set when one exists, else a constant log-scale guess."""
    h = values_of(g, p.h)
    try:
        if p.c == 0:
            hs = h if p.m % 2 else -h
            return seed_B1(g, g.function(hs)).values.copy()
        return seed_B2(g, p.h, p.c).values.copy()
    except SolverError:
        pass
    hbar = float(g.mu @ h) / g.volume
    if p.c != 0 and hbar != 0 and p.c / hbar > 0:
        return np.full(g.n, np.log(p.c / hbar))
    return np.zeros(g.n)


def multistart_newton(
    g: Graph,
    p: Problem,
    cfg: SolverConfig,
    starts: int | None = None,
    first: np.ndarray | None = None,
) -> SolveReport | None:
    """Newton from ``first`` (if given) and then from random starts.

    Random starts are a constant log-scale guess plus standard normal noise,
    drawn from ``numpy.random.default_rng(cfg.rng_seed)``.
    """
    starts = cfg.newton_starts if starts is None else starts
    rng = np.random.default_rng(cfg.rng_seed)
    Lm = poly_laplacian_matrix(g, p.m)
    base = default_guess(g, p)
    inits = [] if first is None else [np.asarray(first, dtype=float)]
    while len(inits) < starts:
        inits.append(base + rng.standard_normal(g.n) * (1.0 + len(inits) % 3))
    for k, u0 in enumerate(inits[:starts]):
        out = try_newton(g, p, u0, cfg, Lm)
        if out is not None:
            u, _, trace = out
            return _newton_report(g, p, u, len(trace) - 1, trace,
                                  [f"multi-start Newton succeeded from start {k}"])
    return None


def continuation(
    g: Graph,
    p: Problem,
    u_start: np.ndarray,
    c_start: float,
    cfg: SolverConfig,
    max_halvings: int = 30,
) -> np.ndarray | None:
    """Follow solutions from ``c_start`` to ``p.c`` by warm-started Newton.

    Steps are geometric (factor ``cfg.march_factor``) while ``c`` keeps its
    sign, and are halved when Newton fails.
    """
    Lm = poly_laplacian_matrix(g, p.m)
    h = values_of(g, p.h)
    c, u = c_start, np.asarray(u_start, dtype=float)
    target = p.c
    while c != target:
        if c != 0 and c * target > 0 and abs(target) > abs(c):
            nxt = c * cfg.march_factor
            nxt = target if abs(nxt) >= abs(target) else nxt
        else:
            nxt = target
        for _ in range(max_halvings):
            try:
                u_new = newton_array(g, p.m, nxt, h, u, cfg, Lm)[0]
                break
            except SolverError:
                nxt = 0.5 * (c + nxt)
        else:
            return None
        c, u = nxt, u_new
    return u


def _variational_then_polish(g: Graph, p: Problem, cfg: SolverConfig) -> SolveReport:
    rep = minimize_variational(g, p, cfg)
    if rep.residual_inf > cfg.residual_tol:
        out = try_newton(g, p, rep.solution.values, cfg)
        if out is not None:
            rep.solution = g.function(out[0])
            rep.residual_inf = out[1]
            rep.notes.append("Newton polish applied")
    return rep


def restarted_monotone(
    g: Graph,
    p: Problem,
    upper: VertexFunction,
    lower: VertexFunction,
    cfg: SolverConfig,
    every: int = RESTART_EVERY,
) -> SolveReport:
    """Monotone iteration restarted from its own iterates.

    Every iterate is again an upper solution, so restarting from it lowers
    ``k = max(1, −h)·e^{u₊}`` and speeds up the linear convergence. Each
    restart re-verifies the iterate; the total budget is ``cfg.max_iterations``.
    """
    h = values_of(g, p.h)
    used, restarts = 0, 0
    while True:
        chunk = min(every, cfg.max_iterations - used)
        try:
            rep = monotone_iterate(g, p, upper, lower, replace(cfg, max_iterations=chunk))
        except MonotoneStalled:
            raise
        except MaxIterations as exc:
            used += chunk
            it = getattr(exc, "iterate", None)
            if used >= cfg.max_iterations or it is None or not is_upper_solution(g, p.c, h, it):
                err = MaxIterations(f"monotone iteration did not converge in {used} steps "
                                    f"({restarts} restarts)")
                err.iterate = it
                raise err from exc
            upper = g.function(it)
            restarts += 1
            continue
        rep.iterations += used
        if restarts:
            rep.notes.append(f"monotone iteration restarted {restarts} times from its iterates")
        return rep


def _solve_negative_m1(g: Graph, p: Problem, cfg: SolverConfig) -> SolveReport:
    h = values_of(g, p.h)
    notes: list[str] = []
    upper = None
    params = None
    try:
        params = construct_upper_solution(g, p.h)
        if p.c >= params.c_star:
            upper = params.upper_solution
            notes.append(f"upper solution from mean-zero Poisson construction "
                         f"(c_star={params.c_star:.6g})")
    except SolverError:
        params = None
    if upper is None and sign_reasons(g, h)["h_nonpositive_nontrivial"]:
        try:
            upper = construct_upper_solution_nonpositive_h(g, p.h, p.c)
            notes.append("upper solution from the h <= 0 construction")
        except SolverError as exc:
            notes.append(f"h <= 0 construction unusable: {exc}")

    last = None
    if upper is not None:
        lower = lower_solution_constant(g, p.h, p.c, below=upper)
        try:
            rep = restarted_monotone(g, p, upper, lower, cfg)
            rep.notes[:0] = notes
            return rep
        except SolverError as exc:
            notes.append(f"monotone iteration: {exc}")
            last = getattr(exc, "iterate", None)
        if last is not None:
            out = try_newton(g, p, last, cfg)
            if out is not None:
                notes.append("Newton polish from the last monotone iterate")
                return _newton_report(g, p, out[0], len(out[2]) - 1, out[2], notes)

    if params is not None and p.c < params.c_star:
        anchor = Problem(1, params.c_star, p.h)
        lower = lower_solution_constant(g, p.h, params.c_star, below=params.upper_solution)
        try:
            base = monotone_iterate(g, anchor, params.upper_solution, lower, cfg)
            u = continuation(g, p, base.solution.values, params.c_star, cfg)
        except SolverError:
            u = None
        if u is not None:
            notes.append(f"continuation in c from the certified solution at c_star")
            return _newton_report(g, p, u, 0, [], notes)

    rep = multistart_newton(g, p, cfg, first=last)
    if rep is not None:
        rep.notes[:0] = notes
        return rep
    raise NoUpperSolutionFound(
        f"no verified upper solution at c={p.c:.6g} and multi-start Newton failed "
        "(heuristic failure, not a proof of non-existence)"
    )


def solve(
    g: Graph,
    p: Problem,
    cfg: SolverConfig | None = None,
    method: str = "auto",
    init: VertexFunction | None = None,
) -> SolveReport:
    """Solve ``Δᵐu = c − h eᵘ`` by the route matching the sign of ``c``.

    ``method`` forces a specific solver; ``init`` only affects Newton. Every
    returned report has been re-certified against ``cfg.residual_tol``.
    """
    cfg = cfg or SolverConfig()
    if method not in METHODS:
        raise InvalidProblem(f"unknown method {method!r}; choose from {METHODS}")
    verdict = check(g, p)
    if verdict.status is Status.INFEASIBLE:
        raise Infeasible(f"{verdict.case.value}: {verdict.basis}")

    if method == "newton":
        u0 = values_of(g, init) if init is not None else default_guess(g, p)
        out = newton_array(g, p.m, p.c, values_of(g, p.h), u0, cfg)
        rep = _newton_report(g, p, out[0], len(out[2]) - 1, out[2], [])
    elif method == "variational":
        rep = _variational_then_polish(g, p, cfg)
    elif method == "monotone":
        if p.m != 1 or not p.c < 0:
            raise InvalidProblem("monotone iteration needs m = 1 and c < 0")
        rep = _solve_negative_m1(g, p, cfg)
    elif p.m == 1 and p.c < 0:
        rep = _solve_negative_m1(g, p, cfg)
    elif verdict.status is Status.SOLVABLE_CERTIFIED:
        try:
            rep = _variational_then_polish(g, p, cfg)
        except (PreconditionFailed, BracketingFailed):
            raise
        except SolverError as exc:
            rep = multistart_newton(g, p, cfg)
            if rep is None:
                raise NoSolutionFound(f"variational route failed ({exc}) and "
                                      "multi-start Newton found nothing") from exc
            rep.notes.insert(0, f"variational route failed: {exc}")
    else:
        # only m > 1 reaches here uncertified; m = 1 is decided above
        raise PreconditionFailed(
            f"order m={p.m}: {verdict.basis}; no theorem covers this case, so auto "
            "refuses (method='newton' tries anyway)"
        )

    u = rep.solution.values
    with np.errstate(over="ignore", invalid="ignore"):
        lap_u, he = poly_laplacian_array(g, u, p.m), h_exp(values_of(g, p.h), u)
    rep.residual_inf = float(np.max(np.abs(lap_u - p.c + he)))
    if not rep.residual_inf <= cfg.residual_tol:
        raise NoSolutionFound(f"final residual {rep.residual_inf:.3e} exceeds tolerance")
    if imbalance(lap_u, p.c, he) > BALANCE_TOL:
        raise NoSolutionFound("small residual but no term of the equation balances another")
    return rep
