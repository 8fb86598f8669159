"""Dense linear algebra on graph Laplacians.

All solves are direct factorizations followed by an explicit residual check;
graphs here are desk-sized (a few thousand vertices at most).
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import (
    BracketingFailed,
    Disconnected,
    IncompatibleRHS,
    NonPositiveShift,
    SolveFailed,
)
from .graph import Graph, VertexFunction, values_of


@dataclass(frozen=True)
class SpectralInfo:
    lambda1: float
    poincare_constant: float

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "poincare_constant": self.poincare_constant}


def poly_laplacian_matrix(g: Graph, m: int) -> np.ndarray:
    return np.linalg.matrix_power(g.laplacian_matrix, m)


def solve_shifted_array(g: Graph, k: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if np.any(~(k > 0)):
        bad = int(np.argmax(~(k > 0)))
        raise NonPositiveShift(f"shift k({g.vertices[bad]!r}) = {k[bad]} is not positive")
    A = g.laplacian_matrix - np.diag(k)
    try:
        phi = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolveFailed(f"shifted Laplacian solve failed: {exc}") from None
    res = np.max(np.abs(A @ phi - rhs)) if len(rhs) else 0.0
    # ‖A‖ scaled check: k can be huge when the upper solution is large
    scale = 1.0 + np.max(np.abs(rhs)) + np.max(np.abs(k * phi))
    if not np.isfinite(res) or res > 1e-10 * scale:
        raise SolveFailed(f"shifted Laplacian residual {res:.3e} exceeds tolerance")
    return phi


def solve_shifted(g: Graph, k: VertexFunction, rhs: VertexFunction) -> VertexFunction:
    """Solve ``Δφ − kφ = rhs`` for ``k > 0``; the operator is then invertible."""
    return g.function(solve_shifted_array(g, values_of(g, k), values_of(g, rhs)))


def solve_poisson_array(g: Graph, f: np.ndarray) -> np.ndarray:
    vol = g.volume
    fmax = float(np.max(np.abs(f)))
    total = float(g.mu @ f)
    if abs(total) > 1e-10 * vol * (1.0 + fmax):
        raise IncompatibleRHS(f"right-hand side integrates to {total:.6g}, not 0")
    n = g.n
    # bordered system pins the constant mode: Δv + s = f, ∫v dμ = 0
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = g.laplacian_matrix
    A[:n, n] = 1.0
    A[n, :n] = g.mu
    b = np.concatenate([f, [0.0]])
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise Disconnected("Laplacian kernel is larger than the constants") from None
    v = sol[:n]
    v = v - (g.mu @ v) / vol
    res = float(np.max(np.abs(g.laplacian_matrix @ v - f)))
    if res > 1e-10 * (1.0 + fmax):
        raise SolveFailed(f"Poisson residual {res:.3e} exceeds tolerance")
    return v


def solve_poisson_mean_zero(g: Graph, f: VertexFunction) -> VertexFunction:
    """Solve ``Δv = f`` with ``average(v) = 0``; ``f`` must integrate to zero."""
    return g.function(solve_poisson_array(g, values_of(g, f)))


def spectral_gap(g: Graph) -> SpectralInfo:
    """Smallest nonzero eigenvalue of ``−Δ`` in the μ-weighted inner product."""
    if g.n < 2:
        raise Disconnected("a single vertex has no spectral gap")
    s = 1.0 / np.sqrt(g.mu)
    deg = g.weights.sum(axis=1)
    # M^{-1/2}(D − W)M^{-1/2} is similar to −Δ = M^{-1}(D − W)
    S = (np.diag(deg) - g.weights) * s[:, None] * s[None, :]
    eig = np.linalg.eigvalsh(S)
    lam1 = float(eig[1])
    if lam1 <= 1e-12 * max(1.0, float(eig[-1])):
        raise Disconnected("second eigenvalue vanishes; graph is disconnected")
    return SpectralInfo(lambda1=lam1, poincare_constant=1.0 / lam1)


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    ftol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Bisection for a sign change of ``f`` on ``[lo, hi]``.

    Stops when ``|f| <= ftol`` or the interval stops shrinking in floating
    point; returns the endpoint with the smaller ``|f|`` in the latter case.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketingFailed(f"no sign change on [{lo}, {hi}]: f={flo:.3g}, {fhi:.3g}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if abs(fm) <= ftol:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo if abs(flo) <= abs(fhi) else hi
