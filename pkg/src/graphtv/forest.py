"""Active set of edges, kept acyclic, and the regions of constant value it
induces.

Regions carry an explicit label per vertex. On a merge the smaller region
is relabelled; on a split the two sides are explored in lock step so only
the smaller side is relabelled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import errors
from .graph import Graph


@dataclass(frozen=True)
class RegionAggregates:
    m: float
    u: float


class ActiveForest:
    def __init__(self, g: Graph):
        n = g.n_vertices
        self.tail = g.tail.tolist()
        self.head = g.head.tolist()
        self.active = [False] * g.n_edges
        self.adjacency: list[list[int]] = [[] for _ in range(n)]
        self.component_id = list(range(n))
        self._size = {k: 1 for k in range(n)}
        self._next_label = n
        self.n_active = 0

    @property
    def n_vertices(self) -> int:
        return len(self.component_id)

    @property
    def n_regions(self) -> int:
        return len(self._size)

    def active_edges(self) -> list[int]:
        return [e for e, a in enumerate(self.active) if a]

    def other(self, e: int, v: int) -> int:
        return self.head[e] if self.tail[e] == v else self.tail[e]

    def same_region(self, a: int, b: int) -> bool:
        return self.component_id[a] == self.component_id[b]

    def tree(self, root: int, skip: int = -1) -> tuple[list[int], list[int], list[int]]:
        """Depth-first order of the region of ``root`` plus two aligned
        lists: the active edge leading to each vertex and the position of
        its parent in the order (both -1 for the root).

        ``skip`` is an active edge treated as absent.
        """
        order = [root]
        via = [-1]
        parent = [-1]
        stack = [(root, -1, 0)]
        adj, tail, head = self.adjacency, self.tail, self.head
        while stack:
            v, pe, pos = stack.pop()
            for e in adj[v]:
                if e == pe or e == skip:
                    continue
                w = head[e] if tail[e] == v else tail[e]
                stack.append((w, e, len(order)))
                order.append(w)
                via.append(e)
                parent.append(pos)
        return order, via, parent

    def region_size(self, v: int) -> int:
        return self._size[self.component_id[v]]

    def add(self, e: int):
        a, b = self.tail[e], self.head[e]
        if self.active[e]:
            raise errors.WouldCreateCycle(f"edge {e} is already active")
        la, lb = self.component_id[a], self.component_id[b]
        if la == lb:
            raise errors.WouldCreateCycle(f"edge {e} would close a cycle in the active set")
        keep, drop, start = (la, lb, b) if self._size[la] >= self._size[lb] else (lb, la, a)
        for v in self.tree(start)[0]:
            self.component_id[v] = keep
        self._size[keep] += self._size.pop(drop)
        self.active[e] = True
        self.adjacency[a].append(e)
        self.adjacency[b].append(e)
        self.n_active += 1

    def remove(self, e: int):
        if not self.active[e]:
            raise errors.EdgeNotActive(f"edge {e} is not active")
        a, b = self.tail[e], self.head[e]
        self.active[e] = False
        self.adjacency[a].remove(e)
        self.adjacency[b].remove(e)
        self.n_active -= 1
        side = self._smaller_side(a, b)
        old = self.component_id[a]
        label = self._next_label
        self._next_label += 1
        for v in side:
            self.component_id[v] = label
        self._size[label] = len(side)
        self._size[old] -= len(side)

    def _smaller_side(self, a: int, b: int) -> list[int]:
        # explore both sides one vertex at a time; stop when either is exhausted
        adj, tail, head = self.adjacency, self.tail, self.head
        seen = [{a}, {b}]
        stacks = [[a], [b]]
        while True:
            for s in (0, 1):
                if not stacks[s]:
                    return list(seen[s])
                v = stacks[s].pop()
                for e in adj[v]:
                    w = head[e] if tail[e] == v else tail[e]
                    if w not in seen[s]:
                        seen[s].add(w)
                        stacks[s].append(w)

    def regions(self) -> np.ndarray:
        """Region label per vertex, renumbered 0..(#regions - 1) by first vertex."""
        labels = {}
        return np.array([labels.setdefault(c, len(labels)) for c in self.component_id])


Handle = Union[int, tuple[int, int]]


def region_of(forest: ActiveForest, k: int) -> set[int]:
    return set(forest.tree(k)[0])


def split_subregions(forest: ActiveForest, edge: tuple[int, int]) -> tuple[set[int], set[int]]:
    """The two sides of the region of I once the active edge (I, J) is cut:
    the side holding I and the side holding J."""
    I, J = edge
    e = _active_edge_between(forest, I, J)
    return set(forest.tree(I, skip=e)[0]), set(forest.tree(J, skip=e)[0])


def _active_edge_between(forest: ActiveForest, I: int, J: int) -> int:
    for e in forest.adjacency[I]:
        if forest.other(e, I) == J:
            return e
    raise errors.EdgeNotActive(f"({I}, {J}) is not an active edge")


def members(forest: ActiveForest, a: Handle) -> set[int]:
    if isinstance(a, tuple):
        return split_subregions(forest, a)[0]
    return region_of(forest, a)


def aggregates(forest: ActiveForest, g: Graph, c, a: Handle) -> RegionAggregates:
    """Total weight u and the combined data/boundary term m of a region
    (vertex handle) or a subregion (``(I, J)`` handle).

    The boundary sum runs over every graph edge touching a member, active
    or not: ``+c*lam`` where the member is the tail, ``-c*lam`` where it is
    the head.
    """
    S = members(forest, a)
    inc = g.incident()
    m = u = 0.0
    for i in S:
        u += g.weights[i]
        m += g.weights[i] * g.data[i]
        for e in inc[i]:
            m += c[e] * g.lam[e] if g.tail[e] == i else -c[e] * g.lam[e]
    return RegionAggregates(float(m), float(u))


def add_active(forest: ActiveForest, e: int) -> ActiveForest:
    forest.add(e)
    return forest


def remove_active(forest: ActiveForest, e: int) -> ActiveForest:
    forest.remove(e)
    return forest
