"""Discrete calculus on weighted graphs and the equation residual.

Everything here is a pure function of a :class:`~kwgraph.graph.Graph` and
:class:`~kwgraph.graph.VertexFunction` arguments. The ``*_array`` helpers
skip wrapping and domain checks and are what the solvers call in loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidProblem, NonFinite
from .graph import Graph, VertexFunction, values_of


@dataclass(frozen=True, eq=False)
class Problem:
    """The equation ``Δᵐu = c − h·eᵘ``."""

    m: int
    c: float
    h: VertexFunction

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise InvalidProblem(f"order m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if not math.isfinite(float(self.c)):
            raise InvalidProblem(f"c must be finite, got {self.c!r}")
        object.__setattr__(self, "c", float(self.c))
        if not np.all(np.isfinite(self.h.values)):
            raise InvalidProblem("h has non-finite values")
        if not np.any(self.h.values != 0):
            raise InvalidProblem("h must not vanish identically")


# -- array kernels -----------------------------------------------------------

def laplacian_array(g: Graph, u: np.ndarray) -> np.ndarray:
    # edge differences vanish exactly on constants, unlike a dense product
    d = g.edge_w * (u[g.edge_v] - u[g.edge_u])
    acc = np.bincount(g.edge_u, weights=d, minlength=g.n)
    acc -= np.bincount(g.edge_v, weights=d, minlength=g.n)
    return acc / g.mu


def poly_laplacian_array(g: Graph, u: np.ndarray, m: int) -> np.ndarray:
    # repeated application keeps Δ^(a+b) bitwise equal to Δ^b(Δ^a)
    for _ in range(m):
        u = laplacian_array(g, u)
    return u


def gamma_array(g: Graph, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    du = u[g.edge_v] - u[g.edge_u]
    dv = v[g.edge_v] - v[g.edge_u]
    t = g.edge_w * (du * dv)
    acc = np.bincount(g.edge_u, weights=t, minlength=g.n)
    acc += np.bincount(g.edge_v, weights=t, minlength=g.n)
    return acc / (2.0 * g.mu)


def grad_m_sq_array(g: Graph, u: np.ndarray, m: int) -> np.ndarray:
    """Pointwise ``|∇ᵐu|²``."""
    if m % 2:
        w = poly_laplacian_array(g, u, (m - 1) // 2)
        return gamma_array(g, w, w)
    return poly_laplacian_array(g, u, m // 2) ** 2


def h_exp(h: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``h·eᵘ`` with exact zeros where ``h`` vanishes."""
    out = np.zeros_like(u, dtype=float)
    nz = h != 0
    with np.errstate(over="ignore"):
        out[nz] = h[nz] * np.exp(u[nz])
    return out


def residual_array(g: Graph, m: int, c: float, h: np.ndarray, u: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return poly_laplacian_array(g, u, m) - c + h_exp(h, u)


BALANCE_TOL = 1e-3


def imbalance(lap_u: np.ndarray, c: float, he: np.ndarray) -> float:
    """``‖F‖∞ / max(‖Δᵐu‖∞, |c|, ‖h eᵘ‖∞)``; near 1 when no term balances another.

    Iterates sliding to ``u → −∞`` with ``c = 0`` drive the absolute residual
    to zero without approaching a solution; this ratio exposes them.
    """
    F = lap_u - c + he
    scale = max(float(np.max(np.abs(lap_u))), abs(c), float(np.max(np.abs(he))))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(F))) / scale


def energy_array(g: Graph, m: int, c: float, u: np.ndarray) -> float:
    return 0.5 * float(g.mu @ grad_m_sq_array(g, u, m)) + c * float(g.mu @ u)


# -- public operators --------------------------------------------------------

def laplacian(g: Graph, u: VertexFunction) -> VertexFunction:
    """``Δu(x) = (1/μ(x)) Σ_{y∼x} w_xy (u(y) − u(x))``."""
    return g.function(laplacian_array(g, values_of(g, u)))


def gamma(g: Graph, u: VertexFunction, v: VertexFunction) -> VertexFunction:
    """Gradient form ``Γ(u,v)(x) = (1/2μ(x)) Σ_{y∼x} w_xy (u(y)−u(x))(v(y)−v(x))``."""
    return g.function(gamma_array(g, values_of(g, u), values_of(g, v)))


def grad_norm(g: Graph, u: VertexFunction) -> VertexFunction:
    a = values_of(g, u)
    return g.function(np.sqrt(gamma_array(g, a, a)))


def integrate(g: Graph, f: VertexFunction) -> float:
    return float(g.mu @ values_of(g, f))


def vol(g: Graph) -> float:
    return g.volume


def average(g: Graph, f: VertexFunction) -> float:
    return integrate(g, f) / g.volume


def poly_laplacian(g: Graph, u: VertexFunction, m: int) -> VertexFunction:
    if m < 1:
        raise InvalidProblem(f"order m must be >= 1, got {m}")
    return g.function(poly_laplacian_array(g, values_of(g, u), m))


def grad_m_norm(g: Graph, u: VertexFunction, m: int) -> VertexFunction:
    """Length of the m-th order gradient.

    Odd ``m`` gives ``|∇(Δ^((m−1)/2) u)|``, even ``m`` gives ``|Δ^(m/2) u|``.
    """
    if m < 1:
        raise InvalidProblem(f"order m must be >= 1, got {m}")
    return g.function(np.sqrt(grad_m_sq_array(g, values_of(g, u), m)))


def residual(g: Graph, p: Problem, u: VertexFunction) -> VertexFunction:
    """``Δᵐu − c + h·eᵘ``; vanishes exactly at solutions.

    Raises :class:`NonFinite` rather than clamping when ``eᵘ`` overflows.
    """
    r = residual_array(g, p.m, p.c, values_of(g, p.h), values_of(g, u))
    if not np.all(np.isfinite(r)):
        raise NonFinite("residual has non-finite entries (overflow in exp(u)?)")
    return g.function(r)


def energy(g: Graph, p: Problem, u: VertexFunction) -> float:
    """``J(u) = ½∫|∇ᵐu|² dμ + c∫u dμ``."""
    values_of(g, p.h)
    return energy_array(g, p.m, p.c, values_of(g, u))
