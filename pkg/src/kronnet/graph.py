"""Directed open graphs, incidence matrices and weighted Laplacians.

Vertices are the dense integers ``1..v``. Edge ``k`` with tail ``i`` and
head ``j`` is column ``k`` of the incidence matrix, holding ``-1`` in row
``i`` and ``+1`` in row ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised when a graph or partition is structurally invalid."""


class SelfLoopError(GraphError):
    def __init__(self, edge_index: int):
        self.edge_index = edge_index
        super().__init__(f"edge {edge_index + 1} is a self-loop")


@dataclass(frozen=True)
class DirectedGraph:
    """Directed graph on vertices ``1..vertex_count``.

    Parallel edges are allowed. Self-loops are representable so that
    validation can report them, but :func:`build_incidence` rejects them.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if int(self.vertex_count) != self.vertex_count or self.vertex_count < 1:
            raise GraphError(f"vertex_count must be a positive integer, got {self.vertex_count!r}")
        edges = tuple((int(t), int(h)) for t, h in self.edges)
        for k, (t, h) in enumerate(edges):
            for vid in (t, h):
                if not 1 <= vid <= self.vertex_count:
                    raise GraphError(f"edge {k + 1} references unknown vertex {vid}")
        object.__setattr__(self, "vertex_count", int(self.vertex_count))
        object.__setattr__(self, "edges", edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    def reversed_edge(self, k: int) -> DirectedGraph:
        """Copy of the graph with edge ``k`` (0-based) flipped."""
        edges = list(self.edges)
        t, h = edges[k]
        edges[k] = (h, t)
        return DirectedGraph(self.vertex_count, tuple(edges))


@dataclass(frozen=True)
class VertexPartition:
    """Split of the vertex set into boundary and internal vertices.

    Both id tuples are kept sorted ascending. Covering and disjointness are
    checked against a graph by :meth:`problems`, not at construction, so an
    invalid partition can still be reported instead of thrown.
    """

    boundary: tuple[int, ...]
    internal: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(sorted(int(v) for v in self.boundary)))
        object.__setattr__(self, "internal", tuple(sorted(int(v) for v in self.internal)))

    @classmethod
    def from_boundary(cls, vertex_count: int, boundary: Iterable[int]) -> VertexPartition:
        b = set(int(v) for v in boundary)
        return cls(tuple(b), tuple(v for v in range(1, vertex_count + 1) if v not in b))

    def problems(self, vertex_count: int) -> list[str]:
        out = []
        b, i = set(self.boundary), set(self.internal)
        if len(b) != len(self.boundary) or len(i) != len(self.internal):
            out.append("partition lists a vertex twice")
        if b & i:
            out.append(f"vertices {sorted(b & i)} are both boundary and internal")
        unknown = sorted(v for v in b | i if not 1 <= v <= vertex_count)
        if unknown:
            out.append(f"partition references unknown vertices {unknown}")
        missing = sorted(set(range(1, vertex_count + 1)) - b - i)
        if missing:
            out.append(f"vertices {missing} are in neither boundary nor internal set")
        if not b:
            out.append("empty boundary: an open graph needs at least one boundary vertex")
        return out


def build_incidence(graph: DirectedGraph) -> np.ndarray:
    """Return the ``v x e`` integer incidence matrix of ``graph``."""
    B = np.zeros((graph.vertex_count, graph.edge_count), dtype=np.int64)
    for k, (t, h) in enumerate(graph.edges):
        if t == h:
            raise SelfLoopError(k)
        B[t - 1, k] = -1
        B[h - 1, k] = 1
    return B


def is_connected(graph: DirectedGraph) -> bool:
    """True iff every vertex pair is joined by a path, ignoring direction."""
    parent = list(range(graph.vertex_count + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = graph.vertex_count
    for t, h in graph.edges:
        rt, rh = find(t), find(h)
        if rt != rh:
            parent[rt] = rh
            components -= 1
    return components == 1


def split_rows(B: np.ndarray, part: VertexPartition) -> tuple[np.ndarray, np.ndarray]:
    """Split ``B`` into its boundary rows ``B_b`` and internal rows ``B_i``.

    Rows are taken in ascending vertex-id order within each block.
    """
    v = B.shape[0]
    for vid in part.boundary + part.internal:
        if not 1 <= vid <= v:
            raise GraphError(f"partition references unknown vertex {vid}")
    b = [vid - 1 for vid in part.boundary]
    i = [vid - 1 for vid in part.internal]
    return B[b, :], B[i, :]


def weighted_laplacian(B: np.ndarray, weights: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return ``B W B^T`` for the diagonal weight matrix ``W = diag(weights)``.

    ``weights`` may be given either as the diagonal or as a square diagonal
    matrix. All weights must be strictly positive.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim == 2:
        w = np.diag(w)
    if w.shape != (B.shape[1],):
        raise GraphError(f"expected {B.shape[1]} edge weights, got {w.shape[0]}")
    bad = np.flatnonzero(~(w > 0))
    if bad.size:
        k = int(bad[0])
        raise GraphError(f"edge {k + 1} has nonpositive weight {w[k]!r}")
    Bf = B.astype(float)
    L = (Bf * w) @ Bf.T
    return 0.5 * (L + L.T)
