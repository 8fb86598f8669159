"""Random connected graphs and functions for property tests."""

from __future__ import annotations

import numpy as np

from kwgraph.graph import Graph, build_graph


def k2(w: float = 1.0, mu=(1.0, 1.0)) -> Graph:
    return build_graph({
        "vertices": [{"id": "a", "mu": mu[0]}, {"id": "b", "mu": mu[1]}],
        "edges": [{"u": "a", "v": "b", "w": w}],
    })


def complete(n: int, w: float = 1.0) -> Graph:
    ids = [f"v{i}" for i in range(n)]
    return build_graph({
        "vertices": [{"id": x, "mu": 1.0} for x in ids],
        "edges": [{"u": ids[i], "v": ids[j], "w": w} for i in range(n) for j in range(i + 1, n)],
    })


def path(n: int) -> Graph:
    ids = [f"p{i}" for i in range(n)]
    return build_graph({
        "vertices": [{"id": x, "mu": 1.0} for x in ids],
        "edges": [{"u": ids[i], "v": ids[i + 1], "w": 1.0} for i in range(n - 1)],
    })


def random_graph(
    rng: np.random.Generator,
    n_max: int = 30,
    n_min: int = 2,
    w_range=(0.1, 10.0),
    mu_range=(0.1, 10.0),
    extra_edge_prob: float = 0.2,
) -> Graph:
    """Random spanning tree plus extra edges, so connectivity is guaranteed."""
    n = int(rng.integers(n_min, n_max + 1))
    ids = [f"x{i}" for i in range(n)]
    pairs = set()
    order = rng.permutation(n)
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(0, k)])
        pairs.add((min(a, b), max(a, b)))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < extra_edge_prob:
                pairs.add((i, j))
    return build_graph({
        "vertices": [{"id": x, "mu": float(rng.uniform(*mu_range))} for x in ids],
        "edges": [{"u": ids[i], "v": ids[j], "w": float(rng.uniform(*w_range))}
                  for i, j in sorted(pairs)],
    })


def h_sign_changing_negative_integral(rng: np.random.Generator, g: Graph) -> np.ndarray:
    """``h`` that changes sign with ``∫h dμ < 0`` (draws until both hold)."""
    while True:
        h = rng.uniform(-2.0, 1.0, g.n)
        if np.any(h > 0) and np.any(h < 0) and g.mu @ h < 0:
            return h


def h_negative_mean(rng: np.random.Generator, g: Graph) -> np.ndarray:
    while True:
        h = rng.uniform(-2.0, 1.0, g.n)
        if np.any(h != 0) and g.mu @ h < 0:
            return h


def h_nonpositive(rng: np.random.Generator, g: Graph, zero_prob: float = 0.3) -> np.ndarray:
    """``h <= 0`` with some exact zeros and at least one negative value."""
    while True:
        h = -rng.uniform(0.1, 2.0, g.n)
        h[rng.random(g.n) < zero_prob] = 0.0
        if np.any(h < 0):
            return h
