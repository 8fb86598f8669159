import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwgraph.errors import DomainMismatch, InvalidProblem, NonFinite
from kwgraph.operators import (
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

from helpers import k2, path, random_graph

LN2 = math.log(2.0)
K2_SOLUTION = (math.log(LN2), math.log(LN2 / 2.0))

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def graph_and_functions(seed, count=2, scale=3.0):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    return g, [g.function(rng.uniform(-scale, scale, g.n)) for _ in range(count)]


# -- hand-computed values ---------------------------------------------------

def test_laplacian_k2():
    g = k2(w=2.0, mu=(1.0, 4.0))
    # Δu(a) = 2(3 − 1)/1, Δu(b) = 2(1 − 3)/4
    assert laplacian(g, g.function([1.0, 3.0])).as_dict() == {"a": 4.0, "b": -1.0}


def test_gamma_and_grad_norm_k2():
    g = k2(w=2.0, mu=(1.0, 4.0))
    u, v = g.function([1.0, 3.0]), g.function([0.0, -1.0])
    # Γ(u,v)(a) = 2·2·(−1)/(2·1), Γ(u,v)(b) = 2·(−2)·1/(2·4)
    assert gamma(g, u, v).as_dict() == {"a": -2.0, "b": -0.5}
    np.testing.assert_allclose(grad_norm(g, u).values, [2.0, 1.0])


def test_path_laplacian():
    g = path(3)
    np.testing.assert_array_equal(laplacian(g, g.function([0.0, 1.0, 4.0])).values, [1.0, 2.0, -3.0])


def test_integrals():
    g = k2(mu=(0.5, 1.5))
    f = g.function([2.0, 4.0])
    assert vol(g) == 2.0
    assert integrate(g, f) == 7.0
    assert average(g, f) == 3.5


def test_constant_is_harmonic():
    rng = np.random.default_rng(0)
    g = random_graph(rng)
    for m in (1, 2, 3):
        np.testing.assert_allclose(poly_laplacian(g, g.constant(5.0), m).values, 0.0, atol=1e-12)


def test_residual_k2_closed_form():
    g = k2()
    p = Problem(1, 0.0, g.function([1.0, -2.0]))
    np.testing.assert_allclose(residual(g, p, g.function(K2_SOLUTION)).values, 0.0, atol=1e-12)


def test_residual_constant_ansatz():
    g = path(4)
    p = Problem(1, -1.0, g.constant(-1.0))
    np.testing.assert_array_equal(residual(g, p, g.constant(0.0)).values, 0.0)


def test_residual_overflow_is_reported():
    g = k2()
    p = Problem(1, 0.0, g.function([1.0, -2.0]))
    with pytest.raises(NonFinite):
        residual(g, p, g.function([800.0, 0.0]))


def test_zero_h_times_overflow_is_zero():
    g = k2()
    p = Problem(1, 0.0, g.function([0.0, -2.0]))
    r = residual(g, p, g.function([800.0, 0.0]))
    assert np.all(np.isfinite(r.values))


def test_energy_k2():
    g = k2()
    p = Problem(1, 2.0, g.function([1.0, -1.0]))
    # ½∫|∇u|² = ½·(½·1 + ½·1) for a unit jump; c∫u = 2·(1 + 0)
    assert energy(g, p, g.function([1.0, 0.0])) == pytest.approx(0.5 + 2.0, abs=1e-15)


@pytest.mark.parametrize("m,c,h", [
    (0, 0.0, [1.0, -1.0]),
    (1.5, 0.0, [1.0, -1.0]),
    (1, math.nan, [1.0, -1.0]),
    (1, 0.0, [0.0, 0.0]),
    (1, 0.0, [1.0, math.inf]),
])
def test_problem_validation(m, c, h):
    g = k2()
    with pytest.raises(InvalidProblem):
        Problem(m, c, g.function(h))


def test_domain_checked():
    with pytest.raises(DomainMismatch):
        laplacian(k2(), path(2).constant(1.0))
    with pytest.raises(InvalidProblem):
        poly_laplacian(k2(), k2().constant(1.0), 0)


# -- identities -------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(seeds)
def test_integration_by_parts(seed):
    g, (u, phi) = graph_and_functions(seed)
    lhs = integrate(g, g.function(phi.values * laplacian(g, u).values))
    rhs = -integrate(g, gamma(g, u, phi))
    scale = float(g.mu @ np.abs(phi.values * laplacian(g, u).values))
    assert abs(lhs - rhs) <= 1e-12 * max(scale, 1.0)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 3))
def test_polyharmonic_integrates_to_zero(seed, m):
    g, (u,) = graph_and_functions(seed, count=1)
    lu = poly_laplacian(g, u, m).values
    assert abs(float(g.mu @ lu)) <= 1e-12 * max(float(g.mu @ np.abs(lu)), 1.0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_polyharmonic_composes_exactly(seed, a, b):
    g, (u,) = graph_and_functions(seed, count=1)
    lhs = poly_laplacian(g, u, a + b).values
    rhs = poly_laplacian(g, poly_laplacian(g, u, a), b).values
    np.testing.assert_array_equal(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(-5, 5), st.floats(-5, 5))
def test_gamma_symmetric_bilinear_nonnegative(seed, s, t):
    g, (u, v, w) = graph_and_functions(seed, count=3)
    guv = gamma(g, u, v).values
    np.testing.assert_array_equal(guv, gamma(g, v, u).values)
    combo = g.function(s * v.values + t * w.values)
    expect = s * guv + t * gamma(g, u, w).values
    np.testing.assert_allclose(gamma(g, u, combo).values, expect,
                               atol=1e-9 * (1 + np.max(np.abs(expect))))
    assert np.all(gamma(g, u, u).values >= 0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3))
def test_gradient_energy_is_quadratic_form(seed, m):
    # ∫|∇ᵐu|² dμ = (−1)ᵐ ∫ u Δᵐu dμ
    g, (u,) = graph_and_functions(seed, count=1, scale=1.0)
    lhs = float(g.mu @ grad_m_norm(g, u, m).values ** 2)
    rhs = (-1) ** m * float(g.mu @ (u.values * poly_laplacian(g, u, m).values))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(-10, 10))
def test_laplacian_ignores_constant_shift(seed, shift):
    g, (u,) = graph_and_functions(seed, count=1)
    shifted = g.function(u.values + shift)
    np.testing.assert_allclose(laplacian(g, shifted).values, laplacian(g, u).values,
                               atol=1e-9 * (1 + abs(shift)) * np.max(g.weights.sum(1) / g.mu))
