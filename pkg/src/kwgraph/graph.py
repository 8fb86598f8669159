"""Weighted graphs with a vertex measure, and functions on their vertices."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any

import numpy as np

from .errors import (
    Disconnected,
    DomainMismatch,
    DuplicateEdge,
    DuplicateVertex,
    EmptyGraph,
    NonPositiveMeasure,
    NonPositiveWeight,
    ParseError,
    SelfLoop,
    UnknownEndpoint,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Finite connected graph with symmetric edge weights and vertex measure.

    Vertices keep their declaration order; index ``i`` of every array below
    refers to ``vertices[i]``. Build instances with :func:`build_graph`.
    """

    vertices: tuple[str, ...]
    mu: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    index: Mapping[str, int] = field(repr=False)
    weights: np.ndarray = field(repr=False)
    laplacian_matrix: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def volume(self) -> float:
        return float(self.mu.sum())

    @property
    def edges(self) -> list[tuple[str, str, float]]:
        return [
            (self.vertices[i], self.vertices[j], float(w))
            for i, j, w in zip(self.edge_u, self.edge_v, self.edge_w)
        ]

    def function(self, values: Mapping[str, float] | Iterable[float]) -> VertexFunction:
        """Wrap values (a mapping keyed by vertex or a sequence in declaration order)."""
        if isinstance(values, Mapping):
            keys = set(values)
            missing = [x for x in self.vertices if x not in keys]
            extra = sorted(keys - set(self.vertices))
            if missing or extra:
                raise DomainMismatch(
                    f"function domain differs from graph: missing={missing} extra={extra}"
                )
            arr = [float(values[x]) for x in self.vertices]
        else:
            arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                             dtype=float)
            if arr.shape != (self.n,):
                raise DomainMismatch(
                    f"expected {self.n} values in vertex order, got shape {np.shape(arr)}"
                )
        return VertexFunction(self.vertices, _frozen(arr))

    def constant(self, value: float) -> VertexFunction:
        return VertexFunction(self.vertices, _frozen(np.full(self.n, float(value))))

    def to_dict(self) -> dict[str, Any]:
        return {
            "vertices": [{"id": x, "mu": float(m)} for x, m in zip(self.vertices, self.mu)],
            "edges": [{"u": a, "v": b, "w": w} for a, b, w in self.edges],
        }


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """Real-valued function on an ordered vertex set."""

    vertices: tuple[str, ...]
    values: np.ndarray

    def __getitem__(self, vertex: str) -> float:
        return float(self.values[self.vertices.index(vertex)])

    def __len__(self) -> int:
        return len(self.vertices)

    def as_dict(self) -> dict[str, float]:
        return {x: float(v) for x, v in zip(self.vertices, self.values)}

    def to_dict(self) -> dict[str, Any]:
        return {"values": self.as_dict()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexFunction):
            return NotImplemented
        return self.vertices == other.vertices and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


def values_of(g: Graph, f: VertexFunction) -> np.ndarray:
    """Return the value array of ``f`` after checking it lives on ``g``."""
    if f.vertices is not g.vertices and f.vertices != g.vertices:
        raise DomainMismatch("function is not defined on this graph's vertex set")
    return f.values


def _number(obj: Any, where: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ParseError(f"{where}: expected a number, got {obj!r}", field=where)
    x = float(obj)
    if not math.isfinite(x):
        raise ParseError(f"{where}: non-finite number {obj!r}", field=where)
    return x


def _connected(n: int, eu: np.ndarray, ev: np.ndarray) -> bool:
    if n == 0:
        return False
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in zip(eu, ev):
        adj[int(i)].append(int(j))
        adj[int(j)].append(int(i))
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                stack.append(y)
    return all(seen)


def build_graph(spec: Mapping[str, Any], require_connected: bool = True) -> Graph:
    """Validate a raw graph description and build a :class:`Graph`.

    ``spec`` follows the JSON file layout::

        {"vertices": [{"id": "a", "mu": 1.0}, ...],
         "edges": [{"u": "a", "v": "b", "w": 1.0}, ...]}

    Connectivity is enforced unless ``require_connected`` is false, which is
    only useful for inspecting broken inputs with :func:`is_connected`.
    """
    if not isinstance(spec, Mapping):
        raise ParseError("graph description must be an object")
    raw_vertices = spec.get("vertices")
    raw_edges = spec.get("edges", [])
    if not isinstance(raw_vertices, list):
        raise ParseError("vertices: expected a list", field="vertices")
    if not isinstance(raw_edges, list):
        raise ParseError("edges: expected a list", field="edges")
    if not raw_vertices:
        raise EmptyGraph("graph has no vertices")

    ids: list[str] = []
    mu: list[float] = []
    index: dict[str, int] = {}
    for k, item in enumerate(raw_vertices):
        if not isinstance(item, Mapping) or "id" not in item or "mu" not in item:
            raise ParseError(f"vertices[{k}]: expected an object with 'id' and 'mu'",
                             field=f"vertices[{k}]")
        vid = item["id"]
        if not isinstance(vid, str):
            raise ParseError(f"vertices[{k}].id: expected a string, got {vid!r}",
                             field=f"vertices[{k}].id")
        m = _number(item["mu"], f"vertices[{k}].mu")
        if vid in index:
            raise DuplicateVertex(f"vertex {vid!r} declared twice")
        if m <= 0:
            raise NonPositiveMeasure(f"vertex {vid!r} has measure {m} <= 0")
        index[vid] = len(ids)
        ids.append(vid)
        mu.append(m)

    n = len(ids)
    seen: dict[frozenset, int] = {}
    eu: list[int] = []
    ev: list[int] = []
    ew: list[float] = []
    for k, item in enumerate(raw_edges):
        if not isinstance(item, Mapping) or not {"u", "v", "w"} <= set(item):
            raise ParseError(f"edges[{k}]: expected an object with 'u', 'v' and 'w'",
                             field=f"edges[{k}]")
        a, b = item["u"], item["v"]
        w = _number(item["w"], f"edges[{k}].w")
        for end in (a, b):
            if not isinstance(end, str) or end not in index:
                raise UnknownEndpoint(f"edge ({a!r}, {b!r}) uses undeclared vertex {end!r}")
        if a == b:
            raise SelfLoop(f"self-loop at vertex {a!r}")
        if w <= 0:
            raise NonPositiveWeight(f"edge ({a!r}, {b!r}) has weight {w} <= 0")
        key = frozenset((a, b))
        if key in seen:
            raise DuplicateEdge(f"edge ({a!r}, {b!r}) declared twice")
        seen[key] = k
        eu.append(index[a])
        ev.append(index[b])
        ew.append(w)

    eu_arr = np.array(eu, dtype=np.intp)
    ev_arr = np.array(ev, dtype=np.intp)
    if require_connected and not _connected(n, eu_arr, ev_arr):
        raise Disconnected("graph is not connected")

    mu_arr = np.array(mu)
    W = np.zeros((n, n))
    W[eu_arr, ev_arr] = ew
    W[ev_arr, eu_arr] = ew
    L = (W - np.diag(W.sum(axis=1))) / mu_arr[:, None]
    eu_arr.setflags(write=False)
    ev_arr.setflags(write=False)
    return Graph(
        vertices=tuple(ids),
        mu=_frozen(mu_arr),
        edge_u=eu_arr,
        edge_v=ev_arr,
        edge_w=_frozen(np.array(ew)),
        index=MappingProxyType(index),
        weights=_frozen(W),
        laplacian_matrix=_frozen(L),
    )


def is_connected(g: Graph) -> bool:
    """True iff every vertex is reachable from the first one."""
    return _connected(g.n, g.edge_u, g.edge_v)
