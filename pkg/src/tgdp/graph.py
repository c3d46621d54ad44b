"""Trust graph data model and edge-list ingestion.

A trust graph is a simple undirected graph over vertices 0..n-1. Edges connect
mutually trusting parties; all privacy and noise-allocation machinery in this
package is driven by closed neighborhoods N[v] = N(v) + {v}.

Raw network files (SNAP edge lists, signed-trust CSVs) use sparse vertex ids;
ingestion remaps them to a dense range, symmetrizes directed edges, and drops
self-loops and duplicates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Sequence


class GraphParseError(ValueError):
    """Raised on malformed or empty edge-list input."""


class VertexRangeError(IndexError):
    """Raised when a vertex id is outside [0, n)."""


class TrustGraph:
    """Undirected simple graph with sorted adjacency lists.

    Vertices are 0..n-1. ``adjacency[v]`` is the open neighborhood N(v),
    sorted ascending. ``id_map[v]`` optionally records the original id of
    vertex v in the source file.
    """

    __slots__ = ("n", "adjacency", "id_map", "_closed_masks")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 id_map: Sequence[int] | None = None):
        if n < 0:
            raise ValueError(f"vertex count must be >= 0, got {n}")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise VertexRangeError(f"edge ({u},{v}) outside [0,{n})")
            if u == v:
                continue
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n = n
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in nbrs)
        self.id_map = tuple(id_map) if id_map is not None else None
        self._closed_masks: tuple[int, ...] | None = None

    # -- basic accessors ---------------------------------------------------

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check_vertex(v)
        return self.adjacency[v]

    def closed_neighborhood(self, v: int) -> tuple[int, ...]:
        """N[v] = N(v) + {v}, sorted ascending."""
        self._check_vertex(v)
        return tuple(sorted(self.adjacency[v] + (v,)))

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self.adjacency[v])

    def degree_vector(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    def edges(self) -> list[tuple[int, int]]:
        """All edges as sorted (u, v) pairs with u < v, lexicographic."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def closed_masks(self) -> tuple[int, ...]:
        """Bitmask per vertex of N[v]; cached, used by the bounds machinery."""
        if self._closed_masks is None:
            masks = []
            for v in range(self.n):
                m = 1 << v
                for u in self.adjacency[v]:
                    m |= 1 << u
                masks.append(m)
            self._closed_masks = tuple(masks)
        return self._closed_masks

    def _check_vertex(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise VertexRangeError(f"vertex {v} outside [0,{self.n})")

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, TrustGraph)
                and self.n == other.n
                and self.adjacency == other.adjacency
                and self.id_map == other.id_map)

    def __repr__(self) -> str:
        return f"TrustGraph(n={self.n}, edges={self.num_edges()})"

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": self.edges(),
            "id_map": list(self.id_map) if self.id_map is not None else None,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TrustGraph":
        return cls(d["n"], [tuple(e) for e in d["edges"]], id_map=d.get("id_map"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "TrustGraph":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def parse_edge_list(text: str | bytes | IO, fmt: str = "snap") -> TrustGraph:
    """Parse a raw edge-list file into a TrustGraph.

    ``snap``: whitespace-separated integer pairs, one edge per line, lines
    starting with '#' are comments. ``bitcoin-csv``: ``source,target,rating[,time]``
    rows where only rating > 0 counts as a trust edge (signed-trust networks).

    Vertex ids are remapped to a dense 0..n-1 range in first-seen order;
    directed edges are symmetrized; self-loops and duplicates dropped.
    """
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if fmt not in ("snap", "bitcoin-csv"):
        raise GraphParseError(f"unknown edge-list format {fmt!r}")

    remap: dict[int, int] = {}
    edges: list[tuple[int, int]] = []

    def dense(orig: int) -> int:
        if orig not in remap:
            remap[orig] = len(remap)
        return remap[orig]

    saw_data = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if fmt == "bitcoin-csv":
            parts = stripped.split(",")
            if len(parts) < 3:
                raise GraphParseError(
                    f"line {lineno}: expected source,target,rating[,...], got {stripped!r}")
            try:
                u_orig, v_orig, rating = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise GraphParseError(f"line {lineno}: {exc}") from None
            saw_data = True
            if rating <= 0:
                continue
        else:
            parts = stripped.split()
            if len(parts) != 2:
                raise GraphParseError(
                    f"line {lineno}: expected two integers, got {stripped!r}")
            try:
                u_orig, v_orig = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphParseError(f"line {lineno}: {exc}") from None
            saw_data = True
        u, v = dense(u_orig), dense(v_orig)
        if u != v:
            edges.append((u, v))

    if not saw_data:
        raise GraphParseError("empty edge list")
    inverse = sorted(remap, key=remap.get)
    return TrustGraph(len(remap), edges, id_map=inverse)


def closed_neighborhood(g: TrustGraph, v: int) -> tuple[int, ...]:
    return g.closed_neighborhood(v)


def degree_vector(g: TrustGraph) -> tuple[int, ...]:
    return g.degree_vector()


def _as_fraction(alpha) -> Fraction:
    # Floats go through their shortest decimal repr so that e.g. 0.1 means
    # exactly 1/10 before the ceiling, not the nearest binary double.
    if isinstance(alpha, float):
        return Fraction(str(alpha))
    return Fraction(alpha)


def make_threshold(g: TrustGraph, alpha) -> tuple[int, ...]:
    """Mistrust thresholds ceil(alpha * deg(v)), exact rational arithmetic."""
    frac = _as_fraction(alpha)
    if not (0 <= frac <= 1):
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    return tuple(int(math.ceil(frac * d)) for d in g.degree_vector())


def clamp_thresholds(g: TrustGraph, t: Sequence[int]) -> tuple[int, ...]:
    """Cap each t_v at deg(v): exclusion sets live inside N(v)."""
    if len(t) != g.n:
        raise ValueError(f"threshold vector length {len(t)} != n={g.n}")
    out = []
    for v, tv in enumerate(t):
        if tv < 0:
            raise ValueError(f"t[{v}] = {tv} is negative")
        out.append(min(int(tv), g.degree(v)))
    return tuple(out)


@dataclass(frozen=True)
class DatasetRecord:
    """Registry entry for a locally stored network dataset."""

    name: str
    path: str
    fmt: str = "snap"
    expected_n: int | None = None
    expected_edges: int | None = None
    expected_max_degree: int | None = None

    def load(self, root: str | Path | None = None) -> TrustGraph:
        p = Path(self.path)
        if root is not None and not p.is_absolute():
            p = Path(root) / p
        g = parse_edge_list(p.read_text(), fmt=self.fmt)
        self.validate(g)
        return g

    def validate(self, g: TrustGraph) -> None:
        checks = [("n", self.expected_n, g.n),
                  ("edges", self.expected_edges, g.num_edges()),
                  ("max_degree", self.expected_max_degree, g.max_degree())]
        for label, want, got in checks:
            if want is not None and want != got:
                raise GraphParseError(
                    f"dataset {self.name}: expected {label}={want}, got {got}")


def load_registry(path: str | Path) -> list[DatasetRecord]:
    raw = json.loads(Path(path).read_text())
    records = raw["datasets"] if isinstance(raw, dict) else raw
    return [DatasetRecord(
        name=r["name"], path=r["path"], fmt=r.get("fmt", "snap"),
        expected_n=r.get("expected_n"), expected_edges=r.get("expected_edges"),
        expected_max_degree=r.get("expected_max_degree")) for r in records]
