"""JSON and TSV file formats.

Graph file::

    {"vertices": [{"id": "a", "mu": 1.0}, ...], "edges": [{"u": "a", "v": "b", "w": 1.0}, ...]}

Function file::

    {"values": {"a": 1.0, "b": -2.0}}
"""

from __future__ import annotations

import json
import math
import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from .errors import DomainMismatch, ParseError, TooLarge
from .graph import Graph, VertexFunction, _number, build_graph

MAX_VERTICES_ENV = "KW_GRAPH_MAX_VERTICES"
DEFAULT_MAX_VERTICES = 5000


def max_vertices() -> int:
    raw = os.environ.get(MAX_VERTICES_ENV)
    if raw is None:
        return DEFAULT_MAX_VERTICES
    try:
        limit = int(raw)
    except ValueError:
        raise ParseError(f"{MAX_VERTICES_ENV}={raw!r} is not an integer",
                         field=MAX_VERTICES_ENV) from None
    if limit < 1:
        raise ParseError(f"{MAX_VERTICES_ENV} must be positive, got {limit}",
                         field=MAX_VERTICES_ENV)
    return limit


def parse_json(text: str, source: str = "<string>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}",
                         line=exc.lineno) from None


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_json(text, str(path))


def graph_from_json(obj: Any) -> Graph:
    if isinstance(obj, Mapping) and isinstance(obj.get("vertices"), list):
        limit = max_vertices()
        if len(obj["vertices"]) > limit:
            raise TooLarge(f"graph has {len(obj['vertices'])} vertices; "
                           f"{MAX_VERTICES_ENV} allows {limit}")
    return build_graph(obj)


def function_from_json(g: Graph, obj: Any) -> VertexFunction:
    if not isinstance(obj, Mapping) or not isinstance(obj.get("values"), Mapping):
        raise ParseError("function file must be an object with a 'values' object",
                         field="values")
    raw = obj["values"]
    missing = [x for x in g.vertices if x not in raw]
    extra = [x for x in raw if x not in g.index]
    if missing or extra:
        raise DomainMismatch(f"function domain differs from the graph: missing {missing}, "
                             f"unknown {extra}")
    return g.function([_number(raw[x], f"values.{x}") for x in g.vertices])


def load_graph(path: str | Path) -> Graph:
    return graph_from_json(read_json(path))


def load_function(g: Graph, path: str | Path) -> VertexFunction:
    return function_from_json(g, read_json(path))


def dumps(obj: Any) -> str:
    """Deterministic JSON: fixed indentation, insertion-ordered keys, shortest round-trip floats."""
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _clean(obj: Any) -> Any:
    # JSON has no inf/nan; they become null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _clean(obj.item())
    return obj


def function_tsv(f: VertexFunction) -> str:
    return "".join(f"{x}\t{float(v):.17g}\n" for x, v in zip(f.vertices, f.values))


def save_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(dumps(g.to_dict()), encoding="utf-8")


def save_function(f: VertexFunction, path: str | Path) -> None:
    Path(path).write_text(dumps(f.to_dict()), encoding="utf-8")
