"""Constrained minimization of ``J(u) = ½∫|∇ᵐu|² dμ + c∫u dμ``.

The minimizer lives on ``B1`` (``c = 0``: ``∫h eᵛ = 0`` and ``∫v = 0``) or on
``B2`` (``c ≠ 0``: ``∫h eᵘ = c·Vol``). We run projected gradient descent in the
μ-weighted metric, restore the constraints after every step, and finish with
a Lagrange–Newton refinement of the stationarity system. Multipliers are
then fitted by least squares and, for ``c = 0``, the constant shift turning
the constrained minimizer into a solution is applied.

For even ``m`` the Euler–Lagrange equation of ``J`` is
``Δᵐu = −c + λ h eᵘ``; minimizing with the linear coefficient ``−c`` instead
makes it ``Δᵐu = c − λ h eᵘ`` again, so the sign of the linear term is
``(−1)^(m+1)·c`` throughout.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConstraintDriftExceeded, MaxIterations, NonFinite, PreconditionFailed
from ..feasibility import seed_B1, seed_B2, sign_reasons
from ..graph import Graph, values_of
from ..numerics import poly_laplacian_matrix
from ..operators import Problem, energy_array, poly_laplacian_array, residual_array
from .config import Method, Multipliers, SolveReport, SolverConfig

ARMIJO = 1e-4
KKT_ITERATIONS = 60


class _Setup:
    """Quantities shared by the descent and refinement phases."""

    def __init__(self, g: Graph, p: Problem):
        self.g = g
        self.mu = g.mu
        self.h = values_of(g, p.h)
        self.m = p.m
        self.c = p.c
        self.sign = 1.0 if p.m % 2 else -1.0
        self.lin = self.sign * p.c
        self.A = (-1.0) ** p.m * poly_laplacian_matrix(g, p.m)
        self.target = p.c * g.volume
        self.zero_c = p.c == 0

    def objective(self, u: np.ndarray) -> float:
        return energy_array(self.g, self.m, self.lin, u)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        return self.A @ u + self.lin

    def hexp(self, u: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.h * np.exp(u)

    def normals(self, u: np.ndarray) -> np.ndarray:
        he = self.hexp(u)
        if self.zero_c:
            return np.stack([he, np.ones_like(u)], axis=1)
        return he[:, None]

    def constraints(self, u: np.ndarray) -> np.ndarray:
        he = self.hexp(u)
        if self.zero_c:
            return np.array([self.mu @ he, self.mu @ u])
        return np.array([self.mu @ he - self.target])

    def constraint_scale(self, u: np.ndarray) -> float:
        return max(1.0, abs(self.target), float(self.mu @ np.abs(self.hexp(u))))

    def project(self, u: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        N = self.normals(u)
        gram = N.T @ (self.mu[:, None] * N)
        alpha = np.linalg.lstsq(gram, N.T @ (self.mu * G), rcond=None)[0]
        return G - N @ alpha, alpha


def _restore_along(s: _Setup, w: np.ndarray, d: np.ndarray, tol: float) -> np.ndarray | None:
    """Solve ``∫h e^{w+βd} dμ = target`` for β by safeguarded 1-D Newton."""
    lo, hi = -np.inf, np.inf
    beta = 0.0
    for _ in range(100):
        with np.errstate(over="ignore", invalid="ignore"):
            e = s.h * np.exp(w + beta * d)
            val = float(s.mu @ e) - s.target
            der = float(s.mu @ (e * d))
        if not (np.isfinite(val) and np.isfinite(der)):
            if beta > 0:
                hi = beta
            else:
                lo = beta
        else:
            if abs(val) <= tol:
                return w + beta * d
            # the local slope says on which side of beta the root lies
            if (val > 0) == (der > 0):
                hi = min(hi, beta)
            else:
                lo = max(lo, beta)
            nxt = beta - val / der if der != 0 else np.nan
            if lo < nxt < hi:
                beta = nxt
                continue
        if np.isfinite(lo) and np.isfinite(hi):
            beta = 0.5 * (lo + hi)
        elif np.isfinite(lo):
            beta = lo + max(1.0, abs(lo))
        elif np.isfinite(hi):
            beta = hi - max(1.0, abs(hi))
        else:
            return None
    return None


def _restore(s: _Setup, u: np.ndarray, tol_rel: float) -> np.ndarray | None:
    # trial points from an overlong step may overflow; they are simply rejected
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = _restore_raw(s, u, tol_rel)
    if out is None or not np.all(np.isfinite(out)):
        return None
    return out


def _restore_raw(s: _Setup, u: np.ndarray, tol_rel: float) -> np.ndarray | None:
    if not np.all(np.isfinite(s.hexp(u))):
        return None
    if s.zero_c:
        w = u - (s.mu @ u) / s.g.volume
        he = s.hexp(w)
        d = he - (s.mu @ he) / s.g.volume
        if not np.any(d):
            return None
        out = _restore_along(s, w, d, tol_rel * s.constraint_scale(w))
        if out is None:
            return None
        return out - (s.mu @ out) / s.g.volume
    total = float(s.mu @ s.hexp(u))
    if total * s.target > 0:
        out = u + np.log(s.target / total)
        if abs(s.constraints(out)[0]) <= tol_rel * s.constraint_scale(out):
            return out
    return _restore_along(s, u, s.hexp(u), tol_rel * s.constraint_scale(u))


def _kkt_refine(s: _Setup, u: np.ndarray, alpha: np.ndarray, cfg: SolverConfig):
    n = len(u)
    k = len(alpha)
    for it in range(KKT_ITERATIONS):
        N = s.normals(u)
        r1 = s.gradient(u) - N @ alpha
        r2 = s.constraints(u)
        gscale = 1.0 + float(np.max(np.abs(s.gradient(u))))
        cscale = s.constraint_scale(u)
        if (np.max(np.abs(r1)) <= 1e-14 * gscale
                and np.max(np.abs(r2)) <= 1e-15 * cscale):
            return u, alpha, it
        K = np.zeros((n + k, n + k))
        K[:n, :n] = s.A - alpha[0] * np.diag(s.hexp(u))
        K[:n, n:] = -N
        K[n:, :n] = (s.mu[:, None] * N).T
        rhs = -np.concatenate([r1, r2])
        try:
            dz = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(K, rhs, rcond=None)[0]
        if not np.all(np.isfinite(dz)):
            raise NonFinite("Lagrange-Newton step is not finite")
        du, da = dz[:n], dz[n:]
        if np.max(np.abs(du)) <= 1e-15 * (1.0 + np.max(np.abs(u))) and \
                np.max(np.abs(da)) <= 1e-15 * (1.0 + np.max(np.abs(alpha))):
            return u + du, alpha + da, it + 1
        u, alpha = u + du, alpha + da
    return u, alpha, KKT_ITERATIONS


def _check_preconditions(s: _Setup) -> None:
    hp = s.sign * s.h
    r = sign_reasons(s.g, hp)
    if s.zero_c:
        if not (r["h_changes_sign"] and r["integral_h_negative"]):
            raise PreconditionFailed(
                "c=0 variational route needs (±)h to change sign with negative integral"
            )
    elif s.lin > 0:
        if not r["h_positive_somewhere"]:
            raise PreconditionFailed("variational route needs (±)h positive somewhere")
    elif not r["h_negative_everywhere"]:
        raise PreconditionFailed("negative-c variational route needs (±)h < 0 everywhere")


def minimize_variational(g: Graph, p: Problem, cfg: SolverConfig | None = None) -> SolveReport:
    """Solve the equation as a constrained minimization.

    Starts from the explicit seed of the constraint set, descends, refines,
    fits multipliers, and certifies the final function with the residual.
    """
    cfg = cfg or SolverConfig()
    s = _Setup(g, p)
    _check_preconditions(s)
    if s.zero_c:
        u = seed_B1(g, g.function(s.sign * s.h)).values.copy()
    else:
        u = seed_B2(g, p.h, p.c).values.copy()

    J = s.objective(u)
    G = s.gradient(u)
    PG, alpha = s.project(u, G)
    trace = [{"iteration": 0, "phase": "descent", "energy": J,
              "projected_gradient": float(np.sqrt(s.mu @ PG**2)),
              "constraint_drift": float(np.max(np.abs(s.constraints(u))))}]
    step = 1.0
    prev = None
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        pg_norm = float(np.sqrt(s.mu @ PG**2))
        if pg_norm <= 1e-10 * (1.0 + float(np.sqrt(s.mu @ G**2))):
            break
        if prev is not None:
            du, dg = u - prev[0], PG - prev[1]
            denom = float(s.mu @ (du * dg))
            if denom > 0:
                step = float(s.mu @ du**2) / denom
        accepted = False
        for _ in range(60):
            trial = _restore(s, u - step * PG, 1e-13)
            if trial is not None:
                Jt = s.objective(trial)
                if np.isfinite(Jt) and Jt <= J - ARMIJO * step * pg_norm**2:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            break
        drift = float(np.max(np.abs(s.constraints(trial))))
        if drift > cfg.constraint_tol * s.constraint_scale(trial):
            raise ConstraintDriftExceeded(f"constraint drift {drift:.3e} after restoration")
        prev = (u, PG)
        u, J = trial, Jt
        G = s.gradient(u)
        PG, alpha = s.project(u, G)
        trace.append({"iteration": it, "phase": "descent", "energy": J,
                      "projected_gradient": float(np.sqrt(s.mu @ PG**2)),
                      "constraint_drift": drift})

    u, alpha, kkt_its = _kkt_refine(s, u, alpha, cfg)
    drift = float(np.max(np.abs(s.constraints(u))))
    trace.append({"iteration": it + kkt_its, "phase": "refine", "energy": s.objective(u),
                  "constraint_drift": drift})
    if not np.all(np.isfinite(u)):
        raise NonFinite("variational iterate is not finite")
    if drift > cfg.constraint_tol * s.constraint_scale(u):
        raise ConstraintDriftExceeded(f"constraint drift {drift:.3e} after refinement")

    Lmu = poly_laplacian_array(g, u, p.m)
    he = s.hexp(u)
    if s.zero_c:
        X = np.stack([0.5 * he, 0.5 * np.ones_like(u)], axis=1)
        lam, gam = np.linalg.lstsq(X, -Lmu, rcond=None)[0]
        if not lam > 0:
            raise MaxIterations(f"recovered multiplier lambda={lam:.6g} is not positive")
        theta = float(np.log(lam / 2.0))
        mult = Multipliers(lam=float(lam), gamma=float(gam), theta=theta)
        sol = u + theta
    else:
        lam = float(np.linalg.lstsq(he[:, None], p.c - Lmu, rcond=None)[0][0])
        mult = Multipliers(lam=lam)
        sol = u

    res = residual_array(g, p.m, p.c, s.h, sol)
    if not np.all(np.isfinite(res)):
        raise NonFinite("residual at the variational solution is not finite")
    rnorm = float(np.max(np.abs(res)))
    if rnorm > cfg.residual_tol:
        raise MaxIterations(f"variational solution residual {rnorm:.3e} exceeds tolerance")
    return SolveReport(
        solution=g.function(sol),
        residual_inf=rnorm,
        iterations=it + kkt_its,
        method=Method.VARIATIONAL,
        energy=energy_array(g, p.m, p.c, sol),
        multipliers=mult,
        trace=trace,
    )
