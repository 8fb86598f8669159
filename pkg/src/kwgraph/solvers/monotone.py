"""Upper/lower solutions and the monotone iteration for ``Δu = c − h eᵘ``, ``c < 0``.

``u₊`` is an upper solution when ``Δu₊ − c + h e^{u₊} ≤ 0`` at every vertex and
``u₋`` a lower solution when the reverse inequality holds. Given
``u₋ ≤ u₊`` the iteration

    (Δ − k) u_{j+1} = c − h e^{u_j} − k u_j,   u_0 = u₊,   k = max{1, −h}·e^{u₊}

decreases monotonically onto a solution between the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    InvalidProblem,
    MaxIterations,
    MonotoneStalled,
    NonFinite,
    NotLowerSolution,
    NotUpperSolution,
    OrderingViolated,
    PreconditionFailed,
)
from ..graph import Graph, VertexFunction, values_of
from ..numerics import solve_poisson_array, solve_shifted_array
from ..operators import Problem, energy_array, h_exp, laplacian_array, residual_array
from .config import Method, SolveReport, SolverConfig

VERIFY_TOL = 1e-12
SANDWICH_SLACK = 1e-12
A_MAX = 1.0
STALL_WINDOW = 10


@dataclass(frozen=True)
class UpperSolutionParams:
    """``u₊ = a·v + b`` with ``Δv = mean(h) − h`` and ``e^b = a``.

    ``u₊`` is an upper solution for every ``c`` with ``c_star <= c < 0``.
    """

    v: VertexFunction
    a: float
    b: float
    c_star: float

    @property
    def upper_solution(self) -> VertexFunction:
        return VertexFunction(self.v.vertices, self.a * self.v.values + self.b)

    def to_dict(self) -> dict:
        return {"v": self.v.as_dict(), "a": self.a, "b": self.b, "c_star": self.c_star}


@dataclass
class MonotoneState:
    u_plus: VertexFunction
    u_minus: VertexFunction
    k1: VertexFunction
    k: VertexFunction
    iterates: list[VertexFunction] = field(default_factory=list)


def _verify_scale(g: Graph, c: float, h: np.ndarray, u: np.ndarray) -> float:
    return VERIFY_TOL * (1.0 + abs(c) + float(np.max(np.abs(laplacian_array(g, u))))
                         + float(np.max(np.abs(h_exp(h, u)))))


def upper_defect(g: Graph, c: float, h: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``Δu − c + h eᵘ`` pointwise; non-positive for an upper solution."""
    r = residual_array(g, 1, c, h, u)
    if not np.all(np.isfinite(r)):
        raise NonFinite("exp(u) overflows while verifying an upper/lower solution")
    return r


def is_upper_solution(g: Graph, c: float, h: np.ndarray, u: np.ndarray) -> bool:
    try:
        return bool(np.all(upper_defect(g, c, h, u) <= _verify_scale(g, c, h, u)))
    except NonFinite:
        return False


def construct_upper_solution(g: Graph, h: VertexFunction) -> UpperSolutionParams:
    """Explicit upper solution certifying solvability at ``c_star = a·mean(h)/2``.

    ``a`` is the largest value in ``(0, 1]`` with
    ``max|e^{a v} − 1| <= −mean(h) / (2 max|h|)``, found by bisection.
    """
    hv = values_of(g, h)
    hbar = float(g.mu @ hv) / g.volume
    if not np.any(hv != 0):
        raise PreconditionFailed("h vanishes identically")
    if not hbar < 0:
        raise PreconditionFailed(f"mean(h) = {hbar:.6g} is not negative")
    v = solve_poisson_array(g, hbar - hv)
    bound = -hbar / (2.0 * float(np.max(np.abs(hv))))

    def ok(a: float) -> bool:
        return float(np.max(np.abs(np.expm1(a * v)))) <= bound

    if ok(A_MAX):
        a = A_MAX
    else:
        lo, hi = 0.0, A_MAX
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if ok(mid):
                lo = mid
            else:
                hi = mid
        a = lo
    if not a > 0:
        raise PreconditionFailed("no positive scale satisfies the upper-solution inequality")
    b = float(np.log(a))
    c_star = a * hbar / 2.0
    params = UpperSolutionParams(v=g.function(v), a=a, b=b, c_star=c_star)
    u = params.upper_solution.values
    defect = upper_defect(g, c_star, hv, u)
    if np.any(defect > VERIFY_TOL):
        bad = int(np.argmax(defect))
        raise NotUpperSolution(
            f"constructed u+ fails at {g.vertices[bad]!r}: defect {defect[bad]:.3e}"
        )
    return params


def construct_upper_solution_nonpositive_h(g: Graph, h: VertexFunction, c: float) -> VertexFunction:
    """Upper solution ``a·v + b`` for ``h <= 0``, valid at any ``c < 0``.

    Takes ``a = c/mean(h) + 1`` and ``b = log(a + 1) − a·min(v)`` so that
    ``a·mean(h) < c`` and ``e^{a v + b} > a`` everywhere.
    """
    hv = values_of(g, h)
    if not c < 0:
        raise PreconditionFailed(f"c = {c} is not negative")
    if np.any(hv > 0) or not np.any(hv < 0):
        raise PreconditionFailed("h must be <= 0 everywhere and not identically 0")
    hbar = float(g.mu @ hv) / g.volume
    v = solve_poisson_array(g, hbar - hv)
    a = c / hbar + 1.0
    b = float(np.log(a + 1.0) - a * float(np.min(v)))
    u = a * v + b
    defect = upper_defect(g, c, hv, u)
    tol = _verify_scale(g, c, hv, u)
    if np.any(defect > tol):
        bad = int(np.argmax(defect))
        raise NotUpperSolution(
            f"constructed u+ fails at {g.vertices[bad]!r}: defect {defect[bad]:.3e}"
        )
    return g.function(u)


def lower_solution_constant(
    g: Graph, h: VertexFunction, c: float, below: VertexFunction | None = None
) -> VertexFunction:
    """Constant lower solution ``−A`` with ``A`` the smallest power of two such that
    ``−c + h e^{−A} >= |c|/2`` everywhere.

    With ``below`` given, ``A`` keeps doubling until ``−A <= min(below)``;
    larger ``A`` never breaks the inequality.
    """
    hv = values_of(g, h)
    if not c < 0:
        raise PreconditionFailed(f"constant lower solution needs c < 0, got {c}")
    floor = np.inf if below is None else float(np.min(values_of(g, below)))
    A = 1.0
    while np.any(-c + hv * np.exp(-A) < abs(c) / 2.0) or -A > floor:
        A *= 2.0
    u = np.full(g.n, -A)
    if np.any(upper_defect(g, c, hv, u) < 0):
        raise NotLowerSolution("constant lower solution failed verification")
    return g.function(u)


def monotone_iterate(
    g: Graph,
    p: Problem,
    u_plus: VertexFunction,
    u_minus: VertexFunction,
    cfg: SolverConfig | None = None,
) -> SolveReport:
    """Monotone iteration between verified lower and upper solutions.

    Each step is checked against ``u₋ <= u_{j+1} <= u_j`` up to a slack of
    ``1e-12`` (relative to the iterate size). On failure to converge the
    raised error carries the last iterate as ``.iterate``.
    """
    cfg = cfg or SolverConfig()
    if p.m != 1:
        raise InvalidProblem("monotone iteration is only available for m = 1")
    h = values_of(g, p.h)
    up = values_of(g, u_plus)
    lo = values_of(g, u_minus)
    if np.any(lo > up):
        bad = int(np.argmax(lo - up))
        raise OrderingViolated(f"u- > u+ at vertex {g.vertices[bad]!r}")
    d_up = upper_defect(g, p.c, h, up)
    if np.any(d_up > _verify_scale(g, p.c, h, up)):
        bad = int(np.argmax(d_up))
        raise NotUpperSolution(f"u+ is not an upper solution at {g.vertices[bad]!r} "
                               f"(defect {d_up[bad]:.3e})")
    d_lo = upper_defect(g, p.c, h, lo)
    if np.any(d_lo < -_verify_scale(g, p.c, h, lo)):
        bad = int(np.argmin(d_lo))
        raise NotLowerSolution(f"u- is not a lower solution at {g.vertices[bad]!r} "
                               f"(defect {d_lo[bad]:.3e})")

    k1 = np.maximum(1.0, -h)
    with np.errstate(over="ignore"):
        k = k1 * np.exp(up)
    if not np.all(np.isfinite(k)):
        raise NonFinite("k = max(1, -h) exp(u+) overflows")
    state = MonotoneState(g.function(up), g.function(lo), g.function(k1), g.function(k),
                          [g.function(up)])

    u = up
    trace = [{"iteration": 0, "residual": float(np.max(np.abs(d_up)))}]
    for it in range(1, cfg.max_iterations + 1):
        rhs = p.c - h_exp(h, u) - k * u
        nxt = solve_shifted_array(g, k, rhs)
        slack = SANDWICH_SLACK * max(1.0, float(np.max(np.abs(u))))
        if np.any(nxt > u + slack) or np.any(nxt < lo - slack):
            viol = np.maximum(nxt - u, lo - nxt)
            bad = int(np.argmax(viol))
            raise OrderingViolated(
                f"monotone sandwich broken at {g.vertices[bad]!r} in step {it} "
                f"(by {viol[bad]:.3e})"
            )
        step = float(np.max(np.abs(nxt - u)))
        u = nxt
        state.iterates.append(g.function(u))
        res = float(np.max(np.abs(residual_array(g, 1, p.c, h, u))))
        trace.append({"iteration": it, "residual": res, "step": step})
        if step <= cfg.step_tol * max(1.0, float(np.max(np.abs(u)))):
            if res <= cfg.residual_tol:
                break
            # with large k the residual is about k·step, so a step below
            # step_tol need not mean stagnation; stop only once progress ends
            if it > STALL_WINDOW and res > 0.99 * trace[it - STALL_WINDOW]["residual"]:
                exc = MonotoneStalled(f"monotone iteration stalled at residual {res:.3e}")
                exc.iterate = u
                raise exc
    else:
        exc = MaxIterations(f"monotone iteration did not converge in {cfg.max_iterations} "
                            f"steps (residual {res:.3e})")
        exc.iterate = u
        raise exc

    report = SolveReport(
        solution=g.function(u),
        residual_inf=res,
        iterations=it,
        method=Method.MONOTONE,
        energy=energy_array(g, 1, p.c, u),
        trace=trace,
        state=state,
    )
    return report
