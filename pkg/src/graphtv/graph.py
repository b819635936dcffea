"""Problem instances: weighted data on the vertices of a graph, with a
smoothing parameter on every edge, and builders for the usual families
(chain, 4-neighbour pixel grid, Delaunay scatter, chain + baseline vertex).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import errors


@dataclass(frozen=True)
class GridShape:
    n1: int  # rows
    n2: int  # columns

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise errors.ShapeMismatch(f"grid shape must be positive, got {self.n1}x{self.n2}")

    @property
    def size(self) -> int:
        return self.n1 * self.n2

    def vertex(self, i1: int, i2: int) -> int:
        """Row-major id of pixel (i1, i2), both 0-based."""
        return i1 * self.n2 + i2


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable problem instance.

    Edges are stored as parallel arrays ``tail``, ``head``, ``lam``; the
    orientation tail -> head only fixes the sign convention of the edge
    coefficients and carries no modelling meaning.
    """

    n_vertices: int
    tail: np.ndarray
    head: np.ndarray
    lam: np.ndarray
    weights: np.ndarray
    data: np.ndarray
    shape: Optional[GridShape] = None
    _incident: list = field(default=None, repr=False, compare=False)

    @property
    def n_edges(self) -> int:
        return len(self.tail)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(l)) for a, b, l in zip(self.tail, self.head, self.lam)]

    def incident(self) -> list[list[int]]:
        """Edge ids touching each vertex, in edge order (computed once)."""
        if self._incident is None:
            inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
            for e, (a, b) in enumerate(zip(self.tail.tolist(), self.head.tolist())):
                inc[a].append(e)
                inc[b].append(e)
            object.__setattr__(self, "_incident", inc)
        return self._incident

    def with_data(self, data) -> "Graph":
        return new_graph(self.n_vertices, self.edges, self.weights, data, shape=self.shape)

    def with_lambdas(self, lam) -> "Graph":
        lam = np.broadcast_to(np.asarray(lam, dtype=float), (self.n_edges,))
        edges = [(a, b, float(l)) for (a, b, _), l in zip(self.edges, lam)]
        return new_graph(self.n_vertices, edges, self.weights, self.data, shape=self.shape)


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def new_graph(n: int, edges: Sequence[tuple[int, int, float]], weights, data,
              shape: Optional[GridShape] = None) -> Graph:
    """Validate and build a :class:`Graph`."""
    n = int(n)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    data = np.asarray(data, dtype=float).reshape(-1)
    if len(weights) != n or len(data) != n:
        raise errors.LengthMismatch(
            f"expected {n} weights and data values, got {len(weights)} and {len(data)}")
    if np.any(weights < 0):
        raise errors.NegativeWeight(f"vertex {int(np.argmax(weights < 0))} has a negative weight")
    if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(data))):
        raise errors.NonFiniteData("weights and data must be finite")

    tails, heads, lams = [], [], []
    seen: set[tuple[int, int]] = set()
    for a, b, lam in edges:
        a, b, lam = int(a), int(b), float(lam)
        if not (0 <= a < n and 0 <= b < n):
            raise errors.IndexOutOfRange(f"edge ({a}, {b}) out of range for {n} vertices")
        if a == b:
            raise errors.SelfLoop(f"self loop at vertex {a}")
        if not lam > 0 or not np.isfinite(lam):
            raise errors.NonPositiveLambda(f"edge ({a}, {b}) has lambda {lam}")
        key = (a, b) if a < b else (b, a)
        if key in seen:
            raise errors.ParallelEdge(f"second edge joining {key[0]} and {key[1]}")
        seen.add(key)
        tails.append(a)
        heads.append(b)
        lams.append(lam)

    return Graph(n, _frozen(tails, np.int64), _frozen(heads, np.int64), _frozen(lams, float),
                 _frozen(weights, float), _frozen(data, float), shape)


def build_chain(y, lambdas, weights=None) -> Graph:
    y = np.asarray(y, dtype=float).reshape(-1)
    n = len(y)
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if len(lambdas) != max(n - 1, 0):
        raise errors.LengthMismatch(f"a chain of {n} points needs {max(n - 1, 0)} lambdas, got {len(lambdas)}")
    w = np.ones(n) if weights is None else weights
    return new_graph(n, [(i, i + 1, lambdas[i]) for i in range(n - 1)], w, y)


def grid_edges(shape: GridShape) -> list[tuple[int, int]]:
    """All horizontal pairs (row-major), then all vertical pairs (row-major)."""
    n1, n2 = shape.n1, shape.n2
    horiz = [(r * n2 + c, r * n2 + c + 1) for r in range(n1) for c in range(n2 - 1)]
    vert = [(r * n2 + c, (r + 1) * n2 + c) for r in range(n1 - 1) for c in range(n2)]
    return horiz + vert


def grid_edge_index(shape: GridShape, i1: int, i2: int, vertical: bool) -> int:
    """Index of the edge leaving pixel (i1, i2) rightwards or downwards."""
    if vertical:
        return shape.n1 * (shape.n2 - 1) + i1 * shape.n2 + i2
    return i1 * (shape.n2 - 1) + i2


def build_grid4(shape: GridShape, data, lam: Union[float, Sequence[float], dict] = 1.0,
                weights=None) -> Graph:
    """4-neighbourhood pixel graph.

    ``lam`` is a scalar, a sequence aligned with :func:`grid_edges`, or a
    mapping ``{(u, v): lambda}`` of overrides on top of a default of 1.
    """
    data = np.asarray(data, dtype=float)
    if data.shape != (shape.n1, shape.n2):
        raise errors.ShapeMismatch(f"data has shape {data.shape}, grid is {shape.n1}x{shape.n2}")
    pairs = grid_edges(shape)
    if isinstance(lam, dict):
        lams = [lam.get((a, b), lam.get((b, a), 1.0)) for a, b in pairs]
    else:
        lams = np.broadcast_to(np.asarray(lam, dtype=float), (len(pairs),))
    w = np.ones(shape.size) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    edges = [(a, b, l) for (a, b), l in zip(pairs, lams)]
    return new_graph(shape.size, edges, w, data.reshape(-1), shape=shape)


def is_chain(g: Graph) -> bool:
    n = g.n_vertices
    return (g.n_edges == n - 1
            and np.array_equal(g.tail, np.arange(n - 1))
            and np.array_equal(g.head, np.arange(1, n)))


def augment_baseline(g: Graph, lambda_b: float) -> Graph:
    """Add a zero-weight dummy vertex (value 0) joined to every chain vertex.

    The dummy gets id ``n``; the new edges are ``(i, n)`` for ``i < n``.
    """
    if not is_chain(g):
        raise errors.NotAChain("augment_baseline expects a chain graph")
    lambda_b = float(lambda_b)
    if not lambda_b > 0:
        raise errors.NonPositiveLambda(f"baseline lambda must be positive, got {lambda_b}")
    n = g.n_vertices
    edges = g.edges + [(i, n, lambda_b) for i in range(n)]
    return new_graph(n + 1, edges, np.append(g.weights, 0.0), np.append(g.data, 0.0))


def connected_components(g: Graph) -> np.ndarray:
    """Component label per vertex of the full graph."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components as cc

    n = g.n_vertices
    adj = coo_matrix((np.ones(g.n_edges), (g.tail, g.head)), shape=(n, n))
    return cc(adj, directed=False)[1]


def build_delaunay_graph(pts, data, lam=1.0, weights=None) -> Graph:
    """Graph on the Delaunay edges of a planar point set.

    ``pts`` is a :class:`~graphtv.delaunay.PointSet` (or raw coordinates);
    ``data`` and ``weights`` are given per *input row*. Rows that share a
    point are merged: weights add up and the value becomes their weighted
    mean (plain mean if all weights are zero).
    ``lam`` is a scalar, an array over the sorted edge list, or a callable
    mapping an array of edge lengths to lambdas.
    """
    from .delaunay import PointSet, delaunay_triangulate, triangle_edges

    if not isinstance(pts, PointSet):
        pts = PointSet.from_coords(pts)
    data = np.asarray(data, dtype=float).reshape(-1)
    if len(data) != len(pts.index):
        raise errors.LengthMismatch(f"{len(pts.index)} points but {len(data)} data values")
    w_in = np.ones(len(data)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    m = len(pts.points)
    w = np.bincount(pts.index, weights=w_in, minlength=m)
    wy = np.bincount(pts.index, weights=w_in * data, minlength=m)
    cnt = np.bincount(pts.index, minlength=m)
    plain = np.bincount(pts.index, weights=data, minlength=m) / cnt
    y = np.where(w > 0, wy / np.where(w > 0, w, 1.0), plain)

    pairs = triangle_edges(delaunay_triangulate(pts))
    if callable(lam):
        a, b = np.array(pairs).T
        lams = lam(np.hypot(*(pts.points[a] - pts.points[b]).T))
    else:
        lams = np.broadcast_to(np.asarray(lam, dtype=float), (len(pairs),))
    return new_graph(m, [(a, b, l) for (a, b), l in zip(pairs, lams)], w, y)
