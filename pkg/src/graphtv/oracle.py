"""Independent checks: an optimality certificate checker that only looks at
(f, c, active set), a reference minimizer for small instances, and an
empty-circumcircle check for triangulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree

from . import errors
from .delaunay import incircle, orient2d
from .graph import Graph


@dataclass
class CertificateReport:
    residuals: dict[str, float]
    form: str  # "strict", "relaxed" or "none"
    tol: float
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.form != "none"

    def __str__(self):
        body = ", ".join(f"{k}={v:.3g}" for k, v in self.residuals.items())
        return f"certificate {self.form} ({body})"


def _subtree_sums(n, tail, head, active_edges, w, b):
    """Per active edge e: (u, m) of the side holding ``tail[e]`` once e is
    cut, plus a list of (u, m, root) per tree. Raises if not a forest."""
    adj = [[] for _ in range(n)]
    for e in active_edges:
        adj[tail[e]].append(e)
        adj[head[e]].append(e)
    seen = [False] * n
    side = {}
    trees = []
    for r in range(n):
        if seen[r]:
            continue
        order, via, parent = [r], [-1], [-1]
        seen[r] = True
        i = 0
        while i < len(order):
            v = order[i]
            for e in adj[v]:
                if e == via[i]:
                    continue
                x = head[e] if tail[e] == v else tail[e]
                if seen[x]:
                    raise errors.WouldCreateCycle("active set contains a cycle")
                seen[x] = True
                order.append(x)
                via.append(e)
                parent.append(i)
            i += 1
        su = [w[v] for v in order]
        sm = [b[v] for v in order]
        for i in range(len(order) - 1, 0, -1):
            su[parent[i]] += su[i]
            sm[parent[i]] += sm[i]
        for i in range(1, len(order)):
            e = via[i]
            if tail[e] == order[i]:
                side[e] = (su[i], sm[i])
            else:
                side[e] = (su[0] - su[i], sm[0] - sm[i])
        trees.append((su[0], sm[0], order))
    return side, trees


def check_certificate(g: Graph, f, c, active, tol: float = 1e-8) -> CertificateReport:
    """Check that (f, c, active) certifies f as the exact minimizer.

    The strict form asks for unit coefficients on active edges and the
    force bound with the full lambda; the relaxed form allows |c| < 1 on
    active edges and bounds the force by |c| lambda. Both require sign
    consistency, region stationarity, an acyclic active set and equal
    values across active edges.
    """
    f = np.asarray(f, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    if len(f) != g.n_vertices or len(c) != g.n_edges:
        raise errors.DimensionMismatch(
            f"graph has {g.n_vertices} vertices and {g.n_edges} edges, got {len(f)} values and {len(c)} coefficients")
    active = sorted(int(e) for e in active)
    if any(not 0 <= e < g.n_edges for e in active):
        raise errors.DimensionMismatch("active edge index out of range")
    tail, head, lam = g.tail.tolist(), g.head.tolist(), g.lam.tolist()
    notes = []

    diff = f[g.head] - f[g.tail]
    wrong = (diff != 0) & (c != np.sign(diff))
    r_sign = float(np.max(np.abs(diff[wrong]), initial=0.0))
    r_range = float(np.max(np.abs(c) - 1, initial=0.0))
    r_equal = float(np.max(np.abs(diff[active]), initial=0.0)) if active else 0.0
    r_unit = float(np.max(1 - np.abs(c[active]), initial=0.0)) if active else 0.0

    b = (g.weights * g.data).astype(float)
    np.add.at(b, g.tail, c * g.lam)
    np.subtract.at(b, g.head, c * g.lam)
    try:
        side, trees = _subtree_sums(g.n_vertices, tail, head, active, g.weights.tolist(), b.tolist())
        acyclic = 0.0
    except errors.WouldCreateCycle:
        notes.append("active set has a cycle")
        return CertificateReport({"acyclic": math.inf}, "none", tol, notes)

    r_stat = 0.0
    for u, m, order in trees:
        r_stat = max(r_stat, abs(u * f[order[0]] - m))
    r_force = r_force_rel = 0.0
    for e in active:
        u, m = side[e]
        # force through e seen from its tail side, as a coefficient times lambda
        t = u * f[tail[e]] - m + c[e] * lam[e]
        r_force = max(r_force, abs(t) - lam[e])
        r_force_rel = max(r_force_rel, abs(t) - abs(c[e]) * lam[e])

    common = {"sign": r_sign, "stationarity": r_stat, "acyclic": acyclic, "equal_on_active": r_equal}
    strict = dict(common, unit_active=r_unit, force_bound=max(r_force, 0.0))
    relaxed = dict(common, c_range=r_range, force_bound_relaxed=max(r_force_rel, 0.0))
    if all(v <= tol for v in strict.values()):
        return CertificateReport(strict, "strict", tol, notes)
    if all(v <= tol for v in relaxed.values()):
        return CertificateReport(relaxed, "relaxed", tol, notes)
    return CertificateReport(dict(strict, **relaxed), "none", tol, notes)


# -- reference minimizer ----------------------------------------------------

def objective(g: Graph, f) -> float:
    """Q(f), evaluated independently of the solver module."""
    f = np.asarray(f, dtype=float)
    terms = np.concatenate([0.5 * g.weights * (f - g.data) ** 2,
                            g.lam * np.abs(f[g.head] - f[g.tail])])
    return math.fsum(terms)

@dataclass
class ReferenceResult:
    f: np.ndarray
    t: np.ndarray  # edge forces, |t| <= lam
    objective: float
    dual_gap: float

    @property
    def c(self) -> np.ndarray:
        return self.t


def _dual_fit(g: Graph, t):
    f = g.data.astype(float).copy()
    np.add.at(f, g.tail, t / g.weights[g.tail])
    np.subtract.at(f, g.head, t / g.weights[g.head])
    return f


def _dual_value(g: Graph, t) -> float:
    f = _dual_fit(g, t)
    return math.fsum(0.5 * g.weights * (g.data ** 2 - f ** 2))


def brute_force_minimize(g: Graph, tol: float = 1e-10, max_sweeps: int = 200000) -> ReferenceResult:
    """Reference minimizer for small graphs with strictly positive weights.

    Works on the dual (one bounded force per edge), first with a box
    constrained quasi-Newton solve and then with exact coordinate steps,
    and finally snaps nearly level clusters to their exact common value.
    Raises NotConverged when the duality gap stays above ``tol``.
    """
    if np.any(g.weights <= 0):
        raise errors.NegativeWeight("the reference minimizer needs positive weights")
    lam = g.lam
    iw = 1.0 / g.weights
    if g.n_edges == 0:
        f = g.data.astype(float)
        return ReferenceResult(f, np.zeros(0), objective(g, f), 0.0)

    def value_grad(t):
        f = _dual_fit(g, t)
        grad = f[g.tail] - f[g.head]
        return 0.5 * np.sum(g.weights * f ** 2), grad

    res = minimize(value_grad, np.zeros(g.n_edges), jac=True, method="L-BFGS-B",
                   bounds=list(zip(-lam, lam)), options={"maxiter": 20000, "ftol": 1e-16, "gtol": 1e-14})
    t = np.clip(res.x, -lam, lam)
    f = _dual_fit(g, t).tolist()
    tl, hd, tt = g.tail.tolist(), g.head.tolist(), t.tolist()
    iwl, laml = iw.tolist(), lam.tolist()
    for _ in range(max_sweeps):
        biggest = 0.0
        for e in range(len(tt)):
            i, j = tl[e], hd[e]
            new = tt[e] + (f[j] - f[i]) / (iwl[i] + iwl[j])
            new = min(max(new, -laml[e]), laml[e])
            d = new - tt[e]
            if d:
                tt[e] = new
                f[i] += d * iwl[i]
                f[j] -= d * iwl[j]
                biggest = max(biggest, abs(d))
        if biggest <= 1e-15 * (1.0 + max(laml)):
            break
    t = np.array(tt)
    f = _dual_fit(g, t)
    best = f
    best_q = objective(g, f)
    for thresh in (1e-9, 1e-7, 1e-5):
        snapped = _snap(g, f, thresh)
        q = objective(g, snapped)
        if q < best_q:
            best, best_q = snapped, q
    gap = best_q - _dual_value(g, t)
    if gap > tol * (1.0 + abs(best_q)):
        raise errors.NotConverged(f"duality gap {gap:.3g} after {max_sweeps} sweeps")
    return ReferenceResult(best, t, best_q, gap)


def _snap(g: Graph, f, thresh: float) -> np.ndarray:
    """Collapse clusters of nearly equal neighbours to the exact value their
    stationarity condition gives, with boundary signs taken from f."""
    n = g.n_vertices
    level = np.abs(f[g.head] - f[g.tail]) <= thresh
    adj = coo_matrix((np.ones(int(level.sum())), (g.tail[level], g.head[level])), shape=(n, n))
    k, lab = connected_components(adj, directed=False)
    sgn = np.sign(f[g.head] - f[g.tail])
    cross = lab[g.tail] != lab[g.head]
    m = np.bincount(lab, weights=g.weights * g.data, minlength=k)
    np.add.at(m, lab[g.tail[cross]], (sgn * g.lam)[cross])
    np.subtract.at(m, lab[g.head[cross]], (sgn * g.lam)[cross])
    u = np.bincount(lab, weights=g.weights, minlength=k)
    return (m / u)[lab]


def certificate_inputs(g: Graph, ref: ReferenceResult, thresh: float = 0.0):
    """(c, active) built from a reference solution: c = force / lambda and
    a spanning forest of the level clusters."""
    f = ref.f
    c = np.clip(ref.t / g.lam, -1.0, 1.0)
    level = np.abs(f[g.head] - f[g.tail]) <= thresh
    n = g.n_vertices
    idx = np.flatnonzero(level)
    if len(idx) == 0:
        return c, []
    # spanning forest, weighting by edge index so the choice is deterministic
    mat = coo_matrix((idx + 1.0, (g.tail[idx], g.head[idx])), shape=(n, n)).tocsr()
    tree = minimum_spanning_tree(mat).tocoo()
    pick = {(min(a, b), max(a, b)) for a, b in zip(tree.row.tolist(), tree.col.tolist())}
    active = [int(e) for e in idx
              if (min(g.tail[e], g.head[e]), max(g.tail[e], g.head[e])) in pick]
    return c, active


# -- triangulation checks ---------------------------------------------------

def delaunay_violations(points, tris, tol: float = 0.0) -> int:
    """Number of (triangle, point) pairs with the point inside the
    triangle's circumcircle, plus triangles that are not counter-clockwise.

    With ``tol == 0`` the exact in-circle predicate decides; otherwise a
    point counts only if it lies more than ``tol`` inside the circle.
    """
    P = np.asarray(points, dtype=float)
    bad = 0
    for a, b, c in tris:
        if orient2d(P[a], P[b], P[c]) <= 0:
            bad += 1
            continue
        others = np.ones(len(P), dtype=bool)
        others[[a, b, c]] = False
        if tol > 0:
            center, radius = _circumcircle(P[a], P[b], P[c])
            bad += int(np.sum(np.hypot(*(P[others] - center).T) < radius - tol))
        else:
            bad += sum(incircle(P[a], P[b], P[c], d) > 0 for d in P[others])
    return bad


def _circumcircle(a, b, c):
    bx, by = b - a
    cx, cy = c - a
    d = 2 * (bx * cy - by * cx)
    ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d
    uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d
    return a + np.array([ux, uy]), float(np.hypot(ux, uy))
