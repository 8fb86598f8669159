"""Acceptance criteria 1-12, each reported as one PASS/FAIL line.

Tolerances are pinned here; run ``pytest tests/test_acceptance.py -v`` and
read the "acceptance criteria" section at the end of the output.
"""

import math
import time

import numpy as np

from kwgraph.errors import MaxIterations, MonotoneStalled, OrderingViolated
from kwgraph.feasibility import Status, check, seed_B1, seed_B2, sign_reasons
from kwgraph.numerics import spectral_gap
from kwgraph.operators import Problem, gamma, integrate, laplacian, poly_laplacian, residual
from kwgraph.solvers import (
    SolverConfig,
    construct_upper_solution,
    construct_upper_solution_nonpositive_h,
    lower_solution_constant,
    minimize_variational,
    monotone_iterate,
    multistart_newton,
    solve,
    solve_newton,
)
from kwgraph.solvers.monotone import upper_defect
from kwgraph.threshold import CERTIFIED, estimate_c_minus

from helpers import complete, h_negative_mean, h_nonpositive, h_sign_changing_negative_integral, k2, random_graph

LN2 = math.log(2.0)
K2_C0 = np.array([math.log(LN2), math.log(LN2 / 2.0)])
RESIDUAL_TOL = 1e-10


def res_inf(g, p, u):
    return float(np.max(np.abs(residual(g, p, u).values)))


def bisect_scalar(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


# (s − 1)(eˢ − 1) = 2 with s = u(a) − u(b); e^{u(b)} = s − 1, e^{u(a)} = s + 1
S_C1 = bisect_scalar(lambda s: (s - 1.0) * math.expm1(s) - 2.0, 1.0, 3.0)
K2_C1 = np.array([math.log(S_C1 + 1.0), math.log(S_C1 - 1.0)])


def test_criterion_1_operator_identities(criterion):
    rng = np.random.default_rng(1001)
    t0 = time.perf_counter()
    worst_ibp = worst_int = 0.0
    for _ in range(200):
        g = random_graph(rng, n_max=30)
        u = g.function(rng.uniform(-3.0, 3.0, g.n))
        phi = g.function(rng.uniform(-3.0, 3.0, g.n))
        lu = laplacian(g, u).values
        lhs = integrate(g, g.function(phi.values * lu))
        rhs = -integrate(g, gamma(g, u, phi))
        worst_ibp = max(worst_ibp, abs(lhs - rhs) / max(float(g.mu @ np.abs(phi.values * lu)), 1.0))
        for m in (1, 2, 3):
            lm = poly_laplacian(g, u, m).values
            worst_int = max(worst_int, abs(float(g.mu @ lm)) / max(float(g.mu @ np.abs(lm)), 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst_ibp <= 1e-12 and worst_int <= 1e-12 and elapsed < 10.0
    criterion(1, ok, f"200 graphs, IBP rel err {worst_ibp:.1e}, |∫Δᵐu| rel {worst_int:.1e} "
                     f"(tol 1e-12), {elapsed:.2f} s (< 10 s)")


def test_criterion_2_k2_zero_c(criterion):
    g = k2()
    p = Problem(1, 0.0, g.function([1.0, -2.0]))
    t0 = time.perf_counter()
    newton = solve_newton(g, p, seed_B1(g, p.h))
    var = minimize_variational(g, p)
    elapsed = time.perf_counter() - t0
    errs = [float(np.max(np.abs(r.solution.values - K2_C0))) for r in (newton, var)]
    resids = [res_inf(g, p, r.solution) for r in (newton, var)]
    ok = max(errs) <= 1e-8 and max(resids) <= RESIDUAL_TOL and elapsed < 1.0
    criterion(2, ok, f"Newton/variational err {errs[0]:.1e}/{errs[1]:.1e} (tol 1e-8), "
                     f"residual {max(resids):.1e} (tol 1e-10), {elapsed:.3f} s (< 1 s)")


def test_criterion_3_k2_positive_c(criterion):
    g = k2()
    p = Problem(1, 1.0, g.function([1.0, -1.0]))
    t0 = time.perf_counter()
    reports = [solve(g, p), minimize_variational(g, p), solve(g, p, method="newton")]
    elapsed = time.perf_counter() - t0
    err = max(float(np.max(np.abs(r.solution.values - K2_C1))) for r in reports)
    resid = max(res_inf(g, p, r.solution) for r in reports)
    ok = err <= 1e-8 and resid <= RESIDUAL_TOL and elapsed < 1.0
    criterion(3, ok, f"s = {S_C1:.12f}, max err {err:.1e} (tol 1e-8), residual {resid:.1e}, "
                     f"{elapsed:.3f} s (< 1 s)")


def test_criterion_4_constant_ansatz(criterion):
    worst_err = worst_res = 0.0
    graphs = [k2(), complete(4)] + [random_graph(np.random.default_rng(s), n_max=12) for s in (41, 42)]
    for g in graphs:
        h = g.constant(-1.0)
        p1 = Problem(1, -1.0, h)
        up = construct_upper_solution_nonpositive_h(g, h, -1.0)
        rep = monotone_iterate(g, p1, up, lower_solution_constant(g, h, -1.0, below=up))
        p2 = Problem(2, -1.0, h)
        var = minimize_variational(g, p2)
        worst_err = max(worst_err, float(np.max(np.abs(rep.solution.values))),
                        float(np.max(np.abs(var.solution.values))))
        worst_res = max(worst_res, res_inf(g, p1, rep.solution), res_inf(g, p2, var.solution))
    ok = worst_err <= 1e-8 and worst_res <= RESIDUAL_TOL
    criterion(4, ok, f"{len(graphs)} graphs, m=1 monotone and m=2 variational, max |u| {worst_err:.1e}, "
                     f"residual {worst_res:.1e} (tol 1e-10)")


def test_criterion_5_zero_c_necessity(criterion):
    rng = np.random.default_rng(1005)
    cfg = SolverConfig(residual_tol=1e-8, rng_seed=5)
    false_pos = not_infeasible = 0
    for i in range(50):
        g = random_graph(rng, n_max=12)
        if i % 2:
            h = rng.uniform(0.1, 2.0, g.n) * rng.choice([-1.0, 1.0])
        else:
            while True:
                h = rng.uniform(-1.0, 2.0, g.n)
                if np.any(h < 0) and np.any(h > 0) and g.mu @ h >= 0:
                    break
        r = sign_reasons(g, h)
        assert not (r["h_changes_sign"] and r["integral_h_negative"])
        p = Problem(1, 0.0, g.function(h))
        if check(g, p).status is not Status.INFEASIBLE:
            not_infeasible += 1
        if multistart_newton(g, p, cfg, starts=50) is not None:
            false_pos += 1
    ok = false_pos == 0 and not_infeasible == 0
    criterion(5, ok, f"50 instances x 50 Newton starts: {false_pos} false positives at residual < 1e-8, "
                     f"{not_infeasible} verdicts other than Infeasible")


def test_criterion_6_monotone_sandwich(criterion):
    rng = np.random.default_rng(1006)
    slack_rel = 1e-12
    broken = unconverged = 0
    worst_iters = 0
    for _ in range(50):
        g = random_graph(rng, n_max=20)
        h = g.function(h_negative_mean(rng, g))
        params = construct_upper_solution(g, h)
        c = params.c_star
        up = params.upper_solution
        lo = lower_solution_constant(g, h, c, below=up)
        try:
            rep = monotone_iterate(g, Problem(1, c, h), up, lo, SolverConfig(max_iterations=500))
        except OrderingViolated:
            broken += 1
            continue
        except (MaxIterations, MonotoneStalled):
            unconverged += 1
            continue
        its = [f.values for f in rep.state.iterates]
        for prev, nxt in zip(its, its[1:]):
            slack = slack_rel * max(1.0, float(np.max(np.abs(prev))))
            if np.any(nxt > prev + slack) or np.any(nxt < lo.values - slack):
                broken += 1
                break
        if rep.residual_inf > RESIDUAL_TOL:
            unconverged += 1
        worst_iters = max(worst_iters, rep.iterations)
    ok = broken == 0 and unconverged == 0
    criterion(6, ok, f"50 instances at c_star: {broken} ordering violations (slack 1e-12), "
                     f"{unconverged} not at residual <= 1e-10 within 500 iterations "
                     f"(max iterations among converged: {worst_iters})")


def test_criterion_7_nonpositive_h(criterion):
    rng = np.random.default_rng(1007)
    failures, worst = [], 0.0
    for _ in range(20):
        g = random_graph(rng, n_max=20)
        h = g.function(h_nonpositive(rng, g))
        for c in (-1.0, -10.0, -100.0, -1000.0):
            p = Problem(1, c, h)
            try:
                rep = solve(g, p)
            except Exception as exc:  # noqa: BLE001 - any failure counts
                failures.append(f"c={c}: {type(exc).__name__}")
                continue
            r = res_inf(g, p, rep.solution)
            worst = max(worst, r)
            if r > RESIDUAL_TOL or check(g, p).status is not Status.SOLVABLE_CERTIFIED:
                failures.append(f"c={c}: residual {r:.1e}")
    criterion(7, not failures, f"20 instances x c in {{-1,-10,-100,-1000}}: {len(failures)} failures, "
                               f"worst residual {worst:.1e} (tol 1e-10)")


def test_criterion_8_upper_certificate(criterion):
    rng = np.random.default_rng(1008)
    worst = -math.inf
    for _ in range(50):
        g = random_graph(rng)
        h = h_negative_mean(rng, g)
        params = construct_upper_solution(g, g.function(h))
        worst = max(worst, float(np.max(upper_defect(g, params.c_star, h, params.upper_solution.values))))
    criterion(8, worst <= 1e-12, f"50 instances, max pointwise Δu₊ − c_star + h e^(u₊) = {worst:.2e} (tol 1e-12)")


def test_criterion_9_multipliers(criterion):
    g = k2()
    m0 = minimize_variational(g, Problem(1, 0.0, g.function([1.0, -2.0]))).multipliers
    m1 = minimize_variational(g, Problem(1, 1.0, g.function([1.0, -1.0]))).multipliers
    ok = abs(m0.gamma) <= 1e-8 and m0.lam > 0 and abs(m1.lam - 1.0) <= 1e-6
    criterion(9, ok, f"c=0: |gamma| {abs(m0.gamma):.1e} (tol 1e-8), lambda {m0.lam:.6g} > 0; "
                     f"c=1: lambda {m1.lam:.9f} (1 ± 1e-6)")


def test_criterion_10_spectral(criterion):
    errs = [abs(spectral_gap(k2()).lambda1 - 2.0), abs(spectral_gap(complete(3)).lambda1 - 3.0)]
    rng = np.random.default_rng(1010)
    violations = 0
    graphs = [k2(), complete(3)] + [random_graph(rng) for _ in range(10)]
    for g in graphs:
        c0 = spectral_gap(g).poincare_constant
        L = g.laplacian_matrix
        for _ in range(100):
            u = rng.uniform(-1.0, 1.0, g.n)
            u -= (g.mu @ u) / g.volume
            if float(g.mu @ u**2) > c0 * -float(g.mu @ (u * (L @ u))) * (1 + 1e-10):
                violations += 1
    ok = max(errs) <= 1e-12 and violations == 0
    criterion(10, ok, f"lambda1 err K2 {errs[0]:.1e}, K3 {errs[1]:.1e} (tol 1e-12); "
                      f"{violations} Poincaré violations over {len(graphs)} graphs x 100 samples")


def test_criterion_11_threshold(criterion):
    g = k2()
    t0 = time.perf_counter()
    est = estimate_c_minus(g, g.function([1.0, -2.0]))
    elapsed = time.perf_counter() - t0
    certified = [pr.c for pr in est.probes if pr.outcome == CERTIFIED]
    failed = [pr.c for pr in est.probes if pr.outcome != CERTIFIED]
    upward_closed = not failed or max(failed) < min(certified)
    ok = upward_closed and est.certified_solvable_at <= -0.039 and elapsed < 30.0
    criterion(11, ok, f"{len(est.probes)} probes, upward closed {upward_closed}, certified at "
                      f"{est.certified_solvable_at:.7f} (<= -0.039), {elapsed:.2f} s (< 30 s)")


def test_criterion_12_seeds(criterion):
    rng = np.random.default_rng(1012)
    worst_b1 = worst_b2 = 0.0
    for _ in range(100):
        g = random_graph(rng)
        h = h_sign_changing_negative_integral(rng, g)
        v = seed_B1(g, g.function(h)).values
        worst_b1 = max(worst_b1, abs(float(g.mu @ (h * np.exp(v)))), abs(float(g.mu @ v)))
        c = float(rng.uniform(-5.0, 5.0))
        u = seed_B2(g, g.function(h), c).values
        target = c * g.volume
        worst_b2 = max(worst_b2, abs(float(g.mu @ (h * np.exp(u))) - target) / (1 + abs(target)))
    g = k2()
    fixture = seed_B1(g, g.function([1.0, -2.0])).values
    err = float(np.max(np.abs(fixture - [LN2 / 2, -LN2 / 2])))
    ok = worst_b1 <= 1e-10 and worst_b2 <= 1e-10 and err <= 1e-12
    criterion(12, ok, f"100 instances, seed_B1 constraint err {worst_b1:.1e}, seed_B2 rel err "
                      f"{worst_b2:.1e} (tol 1e-10); K2 fixture err {err:.1e} (tol 1e-12)")
