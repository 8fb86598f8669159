"""Numerical bracket for the critical constant ``c₋(h)`` (``m = 1``, ``c < 0``).

Solvable values of ``c`` form an interval ``(c₋(h), 0)``. We certify points
from above with residual-checked solutions and mark the first failure below
as heuristic: a solver giving up proves nothing about existence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionFailed, SolverError
from .feasibility import sign_reasons
from .graph import Graph, VertexFunction, values_of
from .operators import Problem
from .solvers.config import SolverConfig
from .solvers.dispatch import multistart_newton, solve
from .solvers.monotone import (
    construct_upper_solution,
    construct_upper_solution_nonpositive_h,
    is_upper_solution,
    lower_solution_constant,
    monotone_iterate,
)

CERTIFIED = "certified"
FAILED = "heuristic_failure"


@dataclass(frozen=True)
class Probe:
    c: float
    outcome: str
    residual: float | None
    method: str
    solution: VertexFunction | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"c": self.c, "outcome": self.outcome, "residual": self.residual,
                "method": self.method}


@dataclass
class ThresholdEstimate:
    certified_solvable_at: float
    heuristic_unsolvable_at: float | None
    bracket_width: float
    probes: list[Probe]
    minus_infinity: bool = False
    c_star: float | None = None

    def to_dict(self) -> dict:
        return {
            "certified_solvable_at": self.certified_solvable_at,
            "heuristic_unsolvable_at": self.heuristic_unsolvable_at,
            "bracket_width": self.bracket_width if math.isfinite(self.bracket_width) else None,
            "minus_infinity": self.minus_infinity,
            "c_star": self.c_star,
            "probes": [pr.to_dict() for pr in self.probes],
        }


def _attempt(g: Graph, h: VertexFunction, c: float, uppers: list[np.ndarray],
             warm: np.ndarray | None, cfg: SolverConfig) -> Probe:
    p = Problem(1, c, h)
    hv = values_of(g, h)
    valid = [u for u in uppers if is_upper_solution(g, c, hv, u)]
    if valid:
        # the pointwise minimum of upper solutions is again one
        up = g.function(np.min(np.stack(valid), axis=0))
        try:
            rep = monotone_iterate(g, p, up, lower_solution_constant(g, h, c, below=up), cfg)
            return Probe(c, CERTIFIED, rep.residual_inf, "Monotone", rep.solution)
        except SolverError:
            pass
    rep = multistart_newton(g, p, cfg, first=warm)
    if rep is not None and rep.residual_inf <= cfg.residual_tol:
        return Probe(c, CERTIFIED, rep.residual_inf, "Newton", rep.solution)
    return Probe(c, FAILED, None, "none")


def estimate_c_minus(
    g: Graph,
    h: VertexFunction,
    cfg: SolverConfig | None = None,
    minus_infinity_probes: int = 4,
) -> ThresholdEstimate:
    """Bracket ``c₋(h)`` between a certified and a heuristically failed ``c``.

    Starts at ``c_star`` from :func:`construct_upper_solution`, multiplies
    ``c`` by ``cfg.march_factor`` until a probe fails, then bisects down to a
    bracket width of ``1e-3·|certified_solvable_at|``. For ``h <= 0`` the
    threshold is ``−∞``; the march then probes ``minus_infinity_probes``
    values, each backed by the explicit ``h <= 0`` upper solution.
    """
    cfg = cfg or SolverConfig()
    hv = values_of(g, h)
    hbar = float(g.mu @ hv) / g.volume
    if not np.any(hv != 0) or not hbar < 0:
        raise PreconditionFailed(f"threshold needs mean(h) < 0 and h != 0 (mean is {hbar:.6g})")
    params = construct_upper_solution(g, h)
    c_star = params.c_star
    u_plus = params.upper_solution.values

    first = _attempt(g, h, c_star, [u_plus], None, cfg)
    if first.outcome != CERTIFIED:
        raise PreconditionFailed("could not solve at the certified c_star")
    probes = [first]

    if sign_reasons(g, hv)["h_nonpositive_nontrivial"]:
        c = c_star
        for _ in range(minus_infinity_probes):
            c *= cfg.march_factor
            construct_upper_solution_nonpositive_h(g, h, c)
            rep = solve(g, Problem(1, c, h), cfg)
            probes.append(Probe(c, CERTIFIED, rep.residual_inf, rep.method.value, rep.solution))
        return ThresholdEstimate(c, None, math.inf, probes, minus_infinity=True, c_star=c_star)

    uppers = [u_plus]
    good = first
    bad: Probe | None = None
    c = c_star
    for _ in range(cfg.max_march_steps):
        c *= cfg.march_factor
        pr = _attempt(g, h, c, uppers, good.solution.values, cfg)
        probes.append(pr)
        if pr.outcome != CERTIFIED:
            bad = pr
            break
        good = pr
        uppers.append(pr.solution.values)

    if bad is not None:
        while abs(bad.c - good.c) > 1e-3 * abs(good.c):
            mid = 0.5 * (bad.c + good.c)
            pr = _attempt(g, h, mid, uppers, good.solution.values, cfg)
            probes.append(pr)
            if pr.outcome == CERTIFIED:
                good = pr
                uppers.append(pr.solution.values)
            else:
                bad = pr

    width = abs(bad.c - good.c) if bad is not None else math.inf
    return ThresholdEstimate(
        certified_solvable_at=good.c,
        heuristic_unsolvable_at=bad.c if bad is not None else None,
        bracket_width=width,
        probes=probes,
        c_star=c_star,
    )
