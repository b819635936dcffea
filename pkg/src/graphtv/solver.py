"""Exact active-set solver for total-variation penalized regression on a graph.

Minimizes

    Q(f) = 1/2 sum_i w_i (f_i - y_i)^2 + sum_(i,j) lam_ij |f_j - f_i|

by following a homotopy in per-edge coefficients c in [-1, 1]. The current
f always minimizes the working objective in which edge (i, j) carries
penalty |c_ij| lam_ij. Edges are taken one at a time; the coefficient of
the current edge (k, l) (k = tail, l = head) is pushed from its value
towards sign(f_l - f_k) while the regions of k and l slide towards each
other. Whenever the active set has to change on the way, the step stops
there: the regions meet (merge), one of them reaches a neighbouring region
(amalgamate), or an active edge inside one of them reaches the limit of its
admissible force and is cut (split).

Region values are always assigned, never recomputed independently, so
vertices joined by active edges hold bit-identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from . import errors
from .forest import ActiveForest
from .graph import Graph
from .schedule import EdgeSchedule, natural_order

EPS = 1e-12


class EventKind(IntEnum):
    # value doubles as the tie-break priority (lower wins)
    MERGE = 0
    AMALGAMATE = 1
    SPLIT = 2
    NO_CHANGE = 3


@dataclass
class Event:
    kind: EventKind
    df_k: float
    df_l: float
    dc: float
    edge: int  # iterated edge (merge, no change), joining edge (amalgamate), cut edge (split)
    side: int = 0  # 0: region of k moves first, 1: region of l
    target: float = 0.0  # amalgamate: value of the absorbed region
    new_c: float = 0.0  # split: coefficient of the cut edge afterwards

    @property
    def step(self) -> float:
        return max(abs(self.df_k), abs(self.df_l))

    def key(self):
        return (self.step, int(self.kind), self.edge)


@dataclass
class SolveOptions:
    trace: bool = False
    event_limit_factor: int = 10
    check: bool = True
    # "python", "compiled", or "auto" (compiled unless a trace is requested)
    engine: str = "auto"


@dataclass
class TraceRecord:
    iteration: int
    edge: int
    kind: str
    df_k: float
    df_l: float
    dc: float
    q_working: float

    def line(self) -> str:
        return (f"{self.iteration} {self.edge} {self.kind} {self.df_k!r} {self.df_l!r} "
                f"{self.dc!r} {self.q_working!r}")


@dataclass
class Certificate:
    """Terminal state and the solver's own optimality residuals.

    Residuals are maxima over edges or regions: sign consistency, |c| = 1
    on active edges, region stationarity u f = m, and the force bound on
    active edges. An independent check lives in :mod:`graphtv.oracle`.
    """

    f: np.ndarray
    c: np.ndarray
    active_edges: list[int]
    residuals: dict[str, float] = field(default_factory=dict)
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())


@dataclass
class SolveResult:
    f: np.ndarray
    c: np.ndarray
    active_edges: list[int]
    regions: np.ndarray
    certificate: Optional[Certificate]
    events_per_iteration: list[int]
    max_region: list[int]  # per schedule position: largest |R(k)| + |R(l)| seen
    n_sweeps: int
    trace: Optional[list[TraceRecord]] = None
    forest: Optional[ActiveForest] = field(default=None, repr=False)

    @property
    def n_events(self) -> int:
        return sum(self.events_per_iteration)


@dataclass
class _Region:
    root: int
    order: list
    via: list
    parent: list
    value: float
    u: float
    m: float
    sub_u: list
    sub_m: list


class SolverState:
    """Mutable solver state: fit, edge coefficients, active forest."""

    def __init__(self, g: Graph, trace: bool = False):
        if not (np.all(np.isfinite(g.data)) and np.all(np.isfinite(g.weights))):
            raise errors.NonFiniteData("data and weights must be finite")
        self.g = g
        self.w = g.weights.tolist()
        self.lam = g.lam.tolist()
        self.tail = g.tail.tolist()
        self.head = g.head.tolist()
        self.inc = g.incident()
        self.f = g.data.tolist()
        self.c = [0.0] * g.n_edges
        self.satisfied = [False] * g.n_edges
        self.forest = ActiveForest(g)
        # b_i = w_i y_i + sum_out c lam - sum_in c lam; m of a region is the sum of b
        self.b = [wi * yi for wi, yi in zip(self.w, self.f)]
        self.trace: Optional[list[TraceRecord]] = [] if trace else None
        self.iteration = 0
        self._mark = [0] * g.n_vertices
        self._stamp = 0
        self._scan_key = None
        self._scan = None
        self._version = 0
        self.peak = 0  # largest |R(k)| + |R(l)| scanned since last reset

    # -- bookkeeping -----------------------------------------------------
    def set_c(self, e: int, value: float):
        d = (value - self.c[e]) * self.lam[e]
        self.c[e] = value
        self.b[self.tail[e]] += d
        self.b[self.head[e]] -= d

    def _touch(self):
        self._version += 1

    def region(self, root: int) -> _Region:
        order, via, parent = self.forest.tree(root)
        w, b = self.w, self.b
        su = [w[v] for v in order]
        sm = [b[v] for v in order]
        for i in range(len(order) - 1, 0, -1):
            p = parent[i]
            su[p] += su[i]
            sm[p] += sm[i]
        return _Region(root, order, via, parent, self.f[root], su[0], sm[0], su, sm)

    def scan(self, e: int) -> tuple[_Region, _Region]:
        key = (e, self._version)
        if self._scan_key != key:
            A = self.region(self.tail[e])
            B = self.region(self.head[e])
            self._stamp += 2
            mark = self._mark
            for v in A.order:
                mark[v] = self._stamp
            for v in B.order:
                mark[v] = self._stamp + 1
            self._scan_key, self._scan = key, (A, B)
            self.peak = max(self.peak, len(A.order) + len(B.order))
        return self._scan

    def assign(self, reg: _Region, value: float):
        f = self.f
        for v in reg.order:
            f[v] = value

    def holds(self, e: int) -> bool:
        """Edge condition: c = sign(f_head - f_tail) or the two values agree."""
        fa, fb = self.f[self.tail[e]], self.f[self.head[e]]
        if fa == fb:
            return True
        return self.c[e] == (1.0 if fb > fa else -1.0)

    def working_objective(self) -> float:
        return working_objective(self.g, self.f, self.c)

    def _record(self, e: int, ev: Event):
        if self.trace is not None:
            self.trace.append(TraceRecord(self.iteration, e, ev.kind.name, ev.df_k, ev.df_l,
                                          ev.dc, self.working_objective()))


# -- objectives ---------------------------------------------------------------

def objective(g: Graph, f) -> float:
    f = np.asarray(f, dtype=float)
    fit = 0.5 * g.weights * (f - g.data) ** 2
    pen = g.lam * np.abs(f[g.head] - f[g.tail])
    return math.fsum(fit) + math.fsum(pen)


def working_objective(g: Graph, f, c) -> float:
    f = np.asarray(f, dtype=float)
    fit = 0.5 * g.weights * (f - g.data) ** 2
    pen = np.abs(np.asarray(c, dtype=float)) * g.lam * np.abs(f[g.head] - f[g.tail])
    return math.fsum(fit) + math.fsum(pen)


# -- events -----------------------------------------------------------------

def _direction(state: SolverState, e: int) -> float:
    fk, fl = state.f[state.tail[e]], state.f[state.head[e]]
    return 1.0 if fl > fk else -1.0


def _dc(A: _Region, B: _Region, dfk: float, dfl: float, lam: float) -> float:
    if A.u > 0:
        return A.u * dfk / lam
    if B.u > 0:
        return -B.u * dfl / lam
    return 0.0


def _paired(side: int, delta: float, A: _Region, B: _Region) -> tuple[float, float]:
    """Moving one region by ``delta`` moves the other by the amount that
    keeps both stationary under the same change of c_kl."""
    X, Y = (A, B) if side == 0 else (B, A)
    other = -X.u * delta / Y.u if Y.u > 0 else 0.0
    return (delta, other) if side == 0 else (other, delta)


def event_no_change(state: SolverState, g: Graph, e: int) -> Optional[Event]:
    """c_kl reaches its target with the active set untouched."""
    A, B = state.scan(e)
    if not (A.u > 0 and B.u > 0):
        return None
    s = _direction(state, e)
    dc = s - state.c[e]
    lam = state.lam[e]
    return Event(EventKind.NO_CHANGE, dc * lam / A.u, -dc * lam / B.u, dc, e)


def event_merge(state: SolverState, g: Graph, e: int) -> Event:
    """The two regions meet at their weighted mean (midpoint if weightless)."""
    A, B = state.scan(e)
    gap = B.value - A.value
    if A.u + B.u > 0:
        dfk = B.u * gap / (A.u + B.u)
        dfl = -A.u * gap / (A.u + B.u)
    else:
        dfk, dfl = gap / 2, -gap / 2
    return Event(EventKind.MERGE, dfk, dfl, _dc(A, B, dfk, dfl, state.lam[e]), e)


def event_amalgamate(state: SolverState, g: Graph, e: int, best_only: bool = False) -> list[Event]:
    """One candidate per boundary edge over which a moving region would run
    into a neighbouring region whose coefficient forbids crossing.

    With ``best_only`` only the preferred candidate of each side is kept.
    """
    A, B = state.scan(e)
    s = _direction(state, e)
    lam = state.lam[e]
    f, c, tail, head, inc, active = state.f, state.c, state.tail, state.head, state.inc, state.forest.active
    mark, stamp = state._mark, state._stamp
    out = []
    for side, X, Y, d in ((0, A, B, s), (1, B, A, -s)):
        fX, fY, uX, uY = X.value, Y.value, X.u, Y.u
        found = []
        for v in X.order:
            for j in inc[v]:
                cj = c[j]
                if cj == 0.0 or active[j]:
                    continue
                if tail[j] == v:
                    K = head[j]
                else:
                    K, cj = tail[j], -cj
                if mark[K] == stamp or mark[K] == stamp + 1:
                    continue
                if (cj > 0) != (d > 0):
                    continue  # moving towards K keeps the sign of c_vK consistent
                fK = f[K]
                if (fK - fX) * d < -EPS or (fK - fY) * d >= 0:
                    continue
                delta = fK - fX
                if not (uY > 0 or uX == 0 or abs(delta) <= EPS):
                    continue
                other = -uX * delta / uY if uY > 0 else 0.0
                found.append((max(abs(delta), abs(other)), j, delta, fK))
        if best_only and found:
            found = [min(found)]
        for _, j, delta, fK in found:
            dfk, dfl = _paired(side, delta, A, B)
            out.append(Event(EventKind.AMALGAMATE, dfk, dfl, _dc(A, B, dfk, dfl, lam), j,
                             side=side, target=fK))
    return out


def event_split(state: SolverState, g: Graph, e: int, best_only: bool = False) -> list[Event]:
    """One candidate per active edge of either region: the displacement at
    which the force the edge has to transmit reaches |c| of that edge.

    For the subtree T hanging off the edge (the side away from the moving
    root), the force expressed as a coefficient is t = c + o (u_T f - m_T)/lam
    with o = +1 when T holds the tail of the edge and -1 otherwise.
    With ``best_only`` only the preferred candidate of each side is kept.
    """
    A, B = state.scan(e)
    if not (A.u > 0 and B.u > 0):
        return []
    s = _direction(state, e)
    lam = state.lam[e]
    c, tail, lam_all = state.c, state.tail, state.lam
    out = []
    for side, X, Y, d in ((0, A, B, s), (1, B, A, -s)):
        fX, ratio = X.value, X.u / Y.u
        order, via, sub_u, sub_m = X.order, X.via, X.sub_u, X.sub_m
        found = []
        best = math.inf
        for i in range(1, len(order)):
            uT = sub_u[i]
            if uT <= 0:
                continue
            j = via[i]
            o = 1.0 if tail[j] == order[i] else -1.0
            cj, lj = c[j], lam_all[j]
            t0 = cj + o * (uT * fX - sub_m[i]) / lj
            bound = o * d * abs(cj)
            delta = (bound - t0) * lj / (o * uT)
            if delta * d < 0:
                if delta * d < -EPS:
                    continue  # already past the limit in the opposite direction
                delta = 0.0
            step = max(abs(delta), abs(ratio * delta))
            if best_only:
                if step > best:
                    continue
                best = step
            found.append((step, j, delta, bound))
        if best_only and found:
            found = [min(found)]
        for _, j, delta, bound in found:
            dfk, dfl = _paired(side, delta, A, B)
            out.append(Event(EventKind.SPLIT, dfk, dfl, _dc(A, B, dfk, dfl, lam), j,
                             side=side, new_c=bound))
    return out


def select_event(candidates: list[Event]) -> Event:
    """Smallest displacement; ties go merge > amalgamate > split > no change,
    then lowest edge index."""
    if not candidates:
        raise errors.NoFeasibleEvent("no feasible event")
    return min(candidates, key=Event.key)


def candidate_events(state: SolverState, g: Graph, e: int) -> list[Event]:
    out = [event_merge(state, g, e)]
    nc = event_no_change(state, g, e)
    if nc is not None:
        out.append(nc)
    out += event_amalgamate(state, g, e, best_only=True)
    out += event_split(state, g, e, best_only=True)
    return out


def apply_event(state: SolverState, g: Graph, ev: Event, e: int) -> bool:
    """Apply ``ev`` for iterated edge ``e``; return True when the iteration
    on ``e`` is finished."""
    A, B = state.scan(e)
    lam = state.lam[e]
    s = _direction(state, e)
    done = False

    if ev.kind is EventKind.MERGE:
        if A.u + B.u > 0:
            v = (A.u * A.value + B.u * B.value) / (A.u + B.u)
        else:
            v = 0.5 * (A.value + B.value)
        state.assign(A, v)
        state.assign(B, v)
        state.forest.add(e)
        state.set_c(e, s)
        done = True
    elif ev.kind is EventKind.NO_CHANGE:
        dc = s - state.c[e]
        state.assign(A, (A.m + dc * lam) / A.u)
        state.assign(B, (B.m - dc * lam) / B.u)
        state.set_c(e, s)
        done = True
    elif ev.kind is EventKind.AMALGAMATE:
        X, Y, sx = (A, B, 1.0) if ev.side == 0 else (B, A, -1.0)
        dc = sx * (X.u * ev.target - X.m) / lam if X.u > 0 else ev.dc
        _move(state, Y, -sx, dc, lam, ev.df_l if ev.side == 0 else ev.df_k)
        state.assign(X, ev.target)
        state.set_c(e, state.c[e] + dc)
        state.forest.add(ev.edge)
    else:  # split
        _move(state, A, 1.0, ev.dc, lam, ev.df_k)
        _move(state, B, -1.0, ev.dc, lam, ev.df_l)
        state.set_c(e, state.c[e] + ev.dc)
        state.forest.remove(ev.edge)
        state.set_c(ev.edge, ev.new_c)

    state._touch()
    state._record(e, ev)
    return done


def _move(state: SolverState, X: _Region, sign: float, dc: float, lam: float, fallback: float):
    # stationary value after c_kl changes by dc (sign: +1 for the tail side)
    if X.u > 0:
        state.assign(X, (X.m + sign * dc * lam) / X.u)
    elif fallback != 0.0:
        state.assign(X, X.value + fallback)


def iterate_edge(state: SolverState, g: Graph, e: int, max_events: Optional[int] = None) -> int:
    """Bring edge ``e`` to c = sign(f_l - f_k) or f_k = f_l. Returns the
    number of events used."""
    k, l = state.tail[e], state.head[e]
    fk, fl = state.f[k], state.f[l]
    forest = state.forest
    if fk == fl or (state.c[e] != 0.0 and (fl - fk) * state.c[e] < 0 and abs(fl - fk) <= EPS):
        # already level (or level up to rounding against the sign of c):
        # join the regions at zero cost and fix the coefficient
        if forest.same_region(k, l):
            return 0
        ev = event_merge(state, g, e)
        A, B = state.scan(e)
        v = (A.u * A.value + B.u * B.value) / (A.u + B.u) if A.u + B.u > 0 else A.value
        state.assign(A, v)
        state.assign(B, v)
        forest.add(e)
        state.set_c(e, state.c[e] if state.c[e] != 0.0 else 1.0)
        if abs(state.c[e]) != 1.0:
            state.set_c(e, math.copysign(1.0, state.c[e]))
        state.satisfied[e] = True
        state._touch()
        state._record(e, ev)
        return 1
    if state.holds(e):
        return 0
    if state.c[e] * (fl - fk) < 0:
        raise errors.NoFeasibleEvent(f"edge {e} has a coefficient of the wrong sign")

    limit = max_events if max_events is not None else 10 * (2 * g.n_edges + 1)
    events = 0
    while True:
        ev = select_event(candidate_events(state, g, e))
        events += 1
        if apply_event(state, g, ev, e):
            break
        if events >= limit:
            raise errors.IterationLimitExceeded(f"edge {e}: more than {limit} events")
    state.satisfied[e] = True
    return events


# -- driver -------------------------------------------------------------------

def solve(g: Graph, schedule: Optional[EdgeSchedule] = None,
          opts: Optional[SolveOptions] = None) -> SolveResult:
    opts = opts or SolveOptions()
    schedule = schedule or natural_order(g)
    if not schedule.is_permutation_of(g.n_edges):
        raise ValueError("schedule must be a permutation of the edge indices")
    if opts.engine not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown engine {opts.engine!r}")
    if not (np.all(np.isfinite(g.data)) and np.all(np.isfinite(g.weights))):
        raise errors.NonFiniteData("data and weights must be finite")
    limit = opts.event_limit_factor * (2 * g.n_edges + 1)
    if opts.engine == "compiled" or (opts.engine == "auto" and not opts.trace):
        return _solve_compiled(g, schedule, opts, limit)

    state = SolverState(g, trace=opts.trace)
    events_per_iteration, max_region = [], []
    size = state.forest.region_size
    for e in schedule.order:
        state.iteration += 1
        state.peak = 0
        k, l = state.tail[e], state.head[e]
        before = size(k) if state.forest.same_region(k, l) else size(k) + size(l)
        events_per_iteration.append(iterate_edge(state, g, e, limit))
        max_region.append(max(before, state.peak, size(state.tail[e])))

    # an edge left level with c = 0 can be pulled apart later; sweep until none is
    sweeps = 0
    while True:
        pending = [e for e in schedule.order if not state.holds(e)]
        if not pending:
            break
        sweeps += 1
        if sweeps > g.n_edges + 1:
            raise errors.IterationLimitExceeded("edge sweeps did not settle")
        for e in pending:
            state.iteration += 1
            events_per_iteration.append(iterate_edge(state, g, e, limit))

    f = np.array(state.f)
    c = np.array(state.c)
    cert = self_check(g, f, c, state.forest) if opts.check else None
    return SolveResult(f, c, state.forest.active_edges(), state.forest.regions(), cert,
                       events_per_iteration, max_region, sweeps, state.trace, state.forest)


def _solve_compiled(g: Graph, schedule: EdgeSchedule, opts: SolveOptions, limit: int) -> SolveResult:
    from . import _kernel

    f, c, active, events, max_region, sweeps, status, bad = _kernel.solve_kernel(
        g.n_vertices, np.ascontiguousarray(g.tail, dtype=np.int64),
        np.ascontiguousarray(g.head, dtype=np.int64), np.ascontiguousarray(g.lam, dtype=float),
        np.ascontiguousarray(g.weights, dtype=float), np.ascontiguousarray(g.data, dtype=float),
        np.asarray(schedule.order, dtype=np.int64), limit)
    if status == _kernel.ITERATION_LIMIT:
        raise errors.IterationLimitExceeded(f"edge {bad}: more than {limit} events")
    if status == _kernel.WRONG_SIGN:
        raise errors.NoFeasibleEvent(f"edge {bad} has a coefficient of the wrong sign")
    if status == _kernel.SWEEP_LIMIT:
        raise errors.IterationLimitExceeded("edge sweeps did not settle")
    forest = ActiveForest(g)
    for e in np.flatnonzero(active).tolist():
        forest.add(e)
    cert = self_check(g, f, c, forest) if opts.check else None
    return SolveResult(f, c, forest.active_edges(), forest.regions(), cert, events.tolist(),
                       max_region.tolist(), int(sweeps), None, forest)


def self_check(g: Graph, f, c, forest: ActiveForest, tol: float = 1e-8) -> Certificate:
    """Residuals of the terminal optimality conditions, from scratch."""
    f = np.asarray(f, dtype=float)
    c = np.asarray(c, dtype=float)
    diff = f[g.head] - f[g.tail]
    wrong = (diff != 0) & (c != np.sign(diff))
    r2 = float(np.max(np.abs(diff[wrong]), initial=0.0))
    active = forest.active_edges()
    r3 = float(np.max(1 - np.abs(c[active]), initial=0.0))

    b = g.weights * g.data
    np.add.at(b, g.tail, c * g.lam)
    np.subtract.at(b, g.head, c * g.lam)
    r4 = r5 = 0.0
    seen = set()
    for root in range(g.n_vertices):
        label = forest.component_id[root]
        if label in seen:
            continue
        seen.add(label)
        order, via, parent = forest.tree(root)
        su = [g.weights[v] for v in order]
        sm = [b[v] for v in order]
        for i in range(len(order) - 1, 0, -1):
            su[parent[i]] += su[i]
            sm[parent[i]] += sm[i]
        fr = f[root]
        r4 = max(r4, abs(su[0] * fr - sm[0]))
        for i in range(1, len(order)):
            j = via[i]
            o = 1.0 if g.tail[j] == order[i] else -1.0
            t = c[j] * g.lam[j] + o * (su[i] * fr - sm[i])
            r5 = max(r5, abs(t) - g.lam[j])
    res = {"sign": r2, "unit_active": r3, "stationarity": r4, "force_bound": max(r5, 0.0)}
    return Certificate(f, c, active, res, tol)


def mean_correction(g: Graph, f, forest_or_regions, skip_empty: bool = False) -> np.ndarray:
    """Reset each region to the plain mean of its observations, ignoring
    zero-weight vertices.

    ``forest_or_regions`` is an :class:`ActiveForest` or a label per vertex.
    """
    labels = (forest_or_regions.regions() if isinstance(forest_or_regions, ActiveForest)
              else np.asarray(forest_or_regions))
    f = np.array(f, dtype=float)
    observed = g.weights > 0
    n_lab = labels.max() + 1 if len(labels) else 0
    tot = np.bincount(labels[observed], weights=g.data[observed], minlength=n_lab)
    cnt = np.bincount(labels[observed], minlength=n_lab)
    empty = cnt[labels] == 0
    if np.any(empty) and not skip_empty:
        raise errors.EmptyRegionMean(f"vertex {int(np.argmax(empty))} lies in a region with no observations")
    out = np.where(empty, f, tot[labels] / np.maximum(cnt[labels], 1))
    return out
