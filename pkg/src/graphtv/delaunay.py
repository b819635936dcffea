"""Incremental Bowyer-Watson Delaunay triangulation in the plane.

The enclosing super-triangle is taken to infinity: every convex-hull edge
carries a "ghost" triangle whose third vertex is the symbolic point at
infinity, so no finite bounding coordinates ever enter a predicate.
Predicates use a floating-point fast path with an exact rational fallback
near zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import errors

GHOST = -1
_EPS = np.finfo(float).eps / 2
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


@dataclass(frozen=True, eq=False)
class PointSet:
    """Distinct planar points plus a map from input rows to point ids."""

    points: np.ndarray  # (m, 2) unique coordinates
    index: np.ndarray  # (n,) input row -> point id

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_coords(cls, xy, tol: float = 1e-12) -> "PointSet":
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(xy)):
            raise errors.NonFiniteData("point coordinates must be finite")
        order = np.lexsort((xy[:, 1], xy[:, 0]))
        index = np.empty(len(xy), dtype=np.int64)
        reps: list[int] = []
        for r in order:
            if reps:
                q = xy[reps[-1]]
                if abs(xy[r, 0] - q[0]) <= tol and abs(xy[r, 1] - q[1]) <= tol:
                    index[r] = len(reps) - 1
                    continue
            reps.append(r)
            index[r] = len(reps) - 1
        # keep ids in order of first appearance in the input
        first = np.full(len(reps), len(xy))
        np.minimum.at(first, index, np.arange(len(xy)))
        relabel = np.empty(len(reps), dtype=np.int64)
        relabel[np.argsort(first, kind="stable")] = np.arange(len(reps))
        index = relabel[index]
        points = np.empty((len(reps), 2))
        points[relabel] = xy[np.asarray(reps, dtype=np.int64)]
        return cls(points, index)


def orient2d(a, b, c) -> float:
    """Positive when c lies left of the directed line a -> b."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    if abs(det) > _CCW_BOUND * (abs(detleft) + abs(detright)):
        return det
    a, b, c = [(Fraction(p[0]), Fraction(p[1])) for p in (a, b, c)]
    return float((a[0] - c[0]) * (b[1] - c[1]) - (a[1] - c[1]) * (b[0] - c[0]))


def incircle(a, b, c, d) -> float:
    """Positive when d is strictly inside the circle through CCW a, b, c."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdx * cdy - cdx * bdy)
           + blift * (cdx * ady - adx * cdy)
           + clift * (adx * bdy - bdx * ady))
    permanent = ((abs(bdx * cdy) + abs(cdx * bdy)) * alift
                 + (abs(cdx * ady) + abs(adx * cdy)) * blift
                 + (abs(adx * bdy) + abs(bdx * ady)) * clift)
    if abs(det) > _ICC_BOUND * permanent:
        return det
    a, b, c, d = [(Fraction(p[0]), Fraction(p[1])) for p in (a, b, c, d)]
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    exact = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
             + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
             + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return float(exact) if exact else 0.0


class _Mesh:
    def __init__(self, pts):
        self.pts = pts
        self.tris: list = []  # [a, b, c] or None when deleted; ghosts have c == GHOST
        self.edge: dict = {}  # directed edge (a, b) -> triangle id
        self.last = 0

    def add(self, a, b, c) -> int:
        t = len(self.tris)
        self.tris.append((a, b, c))
        self.edge[(a, b)] = t
        self.edge[(b, c)] = t
        self.edge[(c, a)] = t
        if c != GHOST:
            self.last = t
        return t

    def remove(self, t):
        a, b, c = self.tris[t]
        for key in ((a, b), (b, c), (c, a)):
            if self.edge.get(key) == t:
                del self.edge[key]
        self.tris[t] = None

    def is_bad(self, t, p) -> bool:
        a, b, c = self.tris[t]
        P = self.pts
        if c == GHOST:
            o = orient2d(P[a], P[b], P[p])
            if o > 0:
                return True
            if o < 0:
                return False
            # collinear: inside only if strictly within the hull edge
            pa, pb, pp = P[a], P[b], P[p]
            return (pp[0] - pa[0]) * (pp[0] - pb[0]) + (pp[1] - pa[1]) * (pp[1] - pb[1]) < 0
        return incircle(P[a], P[b], P[c], P[p]) > 0

    def locate(self, p) -> int:
        P = self.pts
        t = self.last
        for _ in range(4 * len(self.tris) + 10):
            a, b, c = self.tris[t]
            for x, y in ((a, b), (b, c), (c, a)):
                if orient2d(P[x], P[y], P[p]) < 0:
                    t = self.edge[(y, x)]
                    break
            else:
                return t
            if self.tris[t][2] == GHOST:
                return t
        # walking failed to settle (should not happen); fall back to a scan
        for t, tri in enumerate(self.tris):
            if tri is not None and self.is_bad(t, p):
                return t
        raise RuntimeError("point location failed")

    def insert(self, p):
        seed = self.locate(p)
        cavity = {seed}
        stack = [seed]
        boundary = []
        while stack:
            t = stack.pop()
            a, b, c = self.tris[t]
            for x, y in ((a, b), (b, c), (c, a)):
                nb = self.edge[(y, x)]
                if nb in cavity:
                    continue
                if self.is_bad(nb, p):
                    cavity.add(nb)
                    stack.append(nb)
                else:
                    boundary.append((x, y))
        for t in cavity:
            self.remove(t)
        for x, y in boundary:
            if x == GHOST:
                self.add(y, p, GHOST)
            elif y == GHOST:
                self.add(p, x, GHOST)
            else:
                self.add(x, y, p)


def delaunay_triangulate(pts) -> list[tuple[int, int, int]]:
    """Delaunay triangles (counter-clockwise vertex triples) of a point set.

    Co-circular configurations are resolved so that every ambiguous
    diagonal is the lexicographically smallest vertex pair.
    """
    P = pts.points if isinstance(pts, PointSet) else np.asarray(pts, dtype=float).reshape(-1, 2)
    n = len(P)
    if n < 3:
        raise errors.TooFewPoints(f"need at least 3 distinct points, got {n}")
    P = [tuple(map(float, p)) for p in P]

    i0, i1 = 0, 1
    i2 = next((i for i in range(2, n) if orient2d(P[i0], P[i1], P[i]) != 0), None)
    if i2 is None:
        raise errors.AllCollinear("all points are collinear")
    if orient2d(P[i0], P[i1], P[i2]) < 0:
        i1, i2 = i2, i1

    mesh = _Mesh(P)
    mesh.add(i0, i1, i2)
    for x, y in ((i0, i1), (i1, i2), (i2, i0)):
        mesh.add(y, x, GHOST)
    mesh.last = 0
    for p in range(n):
        if p not in (i0, i1, i2):
            mesh.insert(p)

    tris = [t for t in mesh.tris if t is not None and t[2] != GHOST]
    tris = _break_cocircular_ties(P, tris)
    out = []
    for a, b, c in tris:
        while a != min(a, b, c):
            a, b, c = b, c, a
        out.append((a, b, c))
    return sorted(out)


def _break_cocircular_ties(P, tris):
    tris = [tuple(t) for t in tris]
    changed = True
    while changed:
        changed = False
        owner = {}
        for t, (a, b, c) in enumerate(tris):
            owner[(a, b)] = t
            owner[(b, c)] = t
            owner[(c, a)] = t
        for (a, b), t in owner.items():
            if a > b or (b, a) not in owner:
                continue
            s = owner[(b, a)]
            c = next(v for v in tris[t] if v not in (a, b))
            d = next(v for v in tris[s] if v not in (a, b))
            if (min(c, d), max(c, d)) >= (a, b):
                continue
            if incircle(P[a], P[b], P[c], P[d]) != 0:
                continue
            # quad a, d, b, c is convex and co-circular: swap to diagonal c-d
            tris[t] = (a, d, c)
            tris[s] = (d, b, c)
            changed = True
            break
    return tris


def triangle_edges(tris) -> list[tuple[int, int]]:
    """Unique undirected edges (min, max) of a triangle list, sorted."""
    edges = set()
    for a, b, c in tris:
        for x, y in ((a, b), (b, c), (c, a)):
            edges.add((x, y) if x < y else (y, x))
    return sorted(edges)
