"""Compiled event loop.

A line-for-line port of the pure Python engine in :mod:`graphtv.solver`
(same traversal orders, same arithmetic, same tie-breaks), so both engines
return identical floats. The Python engine stays the readable reference
and the one used when an event trace is requested.
"""

from __future__ import annotations

import numpy as np
from numba import njit

EPS = 1e-12

OK = 0
ITERATION_LIMIT = 1
NO_EVENT = 2
WRONG_SIGN = 3
SWEEP_LIMIT = 4

MERGE, AMALGAMATE, SPLIT, NO_CHANGE = 0, 1, 2, 3


@njit(cache=True)
def _tree(root, skip, adj_ptr, adj_cnt, adj_idx, tail, head, order, via, parent, st_v, st_e, st_p):
    order[0] = root
    via[0] = -1
    parent[0] = -1
    cnt = 1
    top = 0
    st_v[0] = root
    st_e[0] = -1
    st_p[0] = 0
    top = 1
    while top > 0:
        top -= 1
        v = st_v[top]
        pe = st_e[top]
        pos = st_p[top]
        for a in range(adj_ptr[v], adj_ptr[v] + adj_cnt[v]):
            e = adj_idx[a]
            if e == pe or e == skip:
                continue
            x = head[e] if tail[e] == v else tail[e]
            st_v[top] = x
            st_e[top] = e
            st_p[top] = cnt
            top += 1
            order[cnt] = x
            via[cnt] = e
            parent[cnt] = pos
            cnt += 1
    return cnt


@njit(cache=True)
def _region(root, adj_ptr, adj_cnt, adj_idx, tail, head, w, b, order, via, parent, su, sm, st_v, st_e, st_p):
    cnt = _tree(root, -1, adj_ptr, adj_cnt, adj_idx, tail, head, order, via, parent, st_v, st_e, st_p)
    for i in range(cnt):
        su[i] = w[order[i]]
        sm[i] = b[order[i]]
    for i in range(cnt - 1, 0, -1):
        p = parent[i]
        su[p] += su[i]
        sm[p] += sm[i]
    return cnt


@njit(cache=True)
def _set_c(e, value, c, b, lam, tail, head):
    d = (value - c[e]) * lam[e]
    c[e] = value
    b[tail[e]] += d
    b[head[e]] -= d


@njit(cache=True)
def _adj_add(v, e, adj_ptr, adj_cnt, adj_idx):
    adj_idx[adj_ptr[v] + adj_cnt[v]] = e
    adj_cnt[v] += 1


@njit(cache=True)
def _adj_remove(v, e, adj_ptr, adj_cnt, adj_idx):
    start = adj_ptr[v]
    k = 0
    while adj_idx[start + k] != e:
        k += 1
    for i in range(start + k, start + adj_cnt[v] - 1):
        adj_idx[i] = adj_idx[i + 1]
    adj_cnt[v] -= 1


@njit(cache=True)
def _push(buf, count, value):
    if count == len(buf):
        nb = np.empty(2 * len(buf) + 16, dtype=buf.dtype)
        nb[:count] = buf[:count]
        buf = nb
    buf[count] = value
    return buf, count + 1


@njit(cache=True)
def solve_kernel(n, tail, head, lam, w, y, sched, limit):
    E = len(tail)
    f = y.copy()
    c = np.zeros(E)
    b = w * y
    active = np.zeros(E, dtype=np.bool_)

    deg = np.zeros(n, dtype=np.int64)
    for e in range(E):
        deg[tail[e]] += 1
        deg[head[e]] += 1
    adj_ptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        adj_ptr[v + 1] = adj_ptr[v] + deg[v]
    inc_idx = np.empty(2 * E, dtype=np.int64)
    fill = np.zeros(n, dtype=np.int64)
    for e in range(E):
        a = tail[e]
        inc_idx[adj_ptr[a] + fill[a]] = e
        fill[a] += 1
        a = head[e]
        inc_idx[adj_ptr[a] + fill[a]] = e
        fill[a] += 1
    adj_cnt = np.zeros(n, dtype=np.int64)
    adj_idx = np.empty(2 * E, dtype=np.int64)

    comp = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    free = np.empty(n, dtype=np.int64)
    n_free = 0

    A_order = np.empty(n, dtype=np.int64)
    A_via = np.empty(n, dtype=np.int64)
    A_par = np.empty(n, dtype=np.int64)
    A_su = np.empty(n)
    A_sm = np.empty(n)
    B_order = np.empty(n, dtype=np.int64)
    B_via = np.empty(n, dtype=np.int64)
    B_par = np.empty(n, dtype=np.int64)
    B_su = np.empty(n)
    B_sm = np.empty(n)
    st_v = np.empty(n, dtype=np.int64)
    st_e = np.empty(n, dtype=np.int64)
    st_p = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.int64)
    stamp = 0
    seen = np.zeros(n, dtype=np.int64)
    seen_stamp = 0
    S0 = np.empty(n, dtype=np.int64)
    S1 = np.empty(n, dtype=np.int64)
    L0 = np.empty(n, dtype=np.int64)
    L1 = np.empty(n, dtype=np.int64)

    ev_buf = np.empty(E + 16, dtype=np.int64)
    n_ev = 0
    max_region = np.empty(E, dtype=np.int64)
    status = OK
    bad_edge = -1
    sweeps = 0

    phase = 0  # 0: schedule pass, 1: sweeps
    pend = sched.copy()
    n_pend = len(sched)
    pos = 0
    while True:
        if pos == n_pend:
            # collect edges whose sign condition fails and sweep over them
            n_pend = 0
            for q in range(len(sched)):
                e = sched[q]
                fa = f[tail[e]]
                fb = f[head[e]]
                ok = fa == fb or c[e] == (1.0 if fb > fa else -1.0)
                if not ok:
                    pend[n_pend] = e
                    n_pend += 1
            if n_pend == 0:
                break
            sweeps += 1
            if sweeps > E + 1:
                status = SWEEP_LIMIT
                break
            phase = 1
            pos = 0
        e = pend[pos]
        pos += 1
        k = tail[e]
        l = head[e]
        peak = 0
        before = size[comp[k]] if comp[k] == comp[l] else size[comp[k]] + size[comp[l]]
        events = 0

        fk = f[k]
        fl = f[l]
        if fk == fl or (c[e] != 0.0 and (fl - fk) * c[e] < 0 and abs(fl - fk) <= EPS):
            if comp[k] != comp[l]:
                na = _region(k, adj_ptr, adj_cnt, adj_idx, tail, head, w, b, A_order, A_via, A_par, A_su, A_sm, st_v, st_e, st_p)
                nb = _region(l, adj_ptr, adj_cnt, adj_idx, tail, head, w, b, B_order, B_via, B_par, B_su, B_sm, st_v, st_e, st_p)
                stamp += 2
                peak = max(peak, na + nb)
                uA = A_su[0]
                uB = B_su[0]
                vA = f[k]
                vB = f[l]
                val = (uA * vA + uB * vB) / (uA + uB) if uA + uB > 0 else vA
                for i in range(na):
                    f[A_order[i]] = val
                for i in range(nb):
                    f[B_order[i]] = val
                n_free = _forest_add(e, tail, head, comp, size, free, n_free, active, adj_ptr, adj_cnt, adj_idx, L0, A_via, A_par, st_v, st_e, st_p)
                _set_c(e, c[e] if c[e] != 0.0 else 1.0, c, b, lam, tail, head)
                if abs(c[e]) != 1.0:
                    _set_c(e, 1.0 if c[e] > 0 else -1.0, c, b, lam, tail, head)
                events = 1
        else:
            fa = fk
            fb = fl
            holds = c[e] == (1.0 if fb > fa else -1.0)
            if not holds:
                if c[e] * (fl - fk) < 0:
                    status = WRONG_SIGN
                    bad_edge = e
                    break
                lam_e = lam[e]
                while True:
                    na = _region(k, adj_ptr, adj_cnt, adj_idx, tail, head, w, b, A_order, A_via, A_par, A_su, A_sm, st_v, st_e, st_p)
                    nb = _region(l, adj_ptr, adj_cnt, adj_idx, tail, head, w, b, B_order, B_via, B_par, B_su, B_sm, st_v, st_e, st_p)
                    stamp += 2
                    for i in range(na):
                        mark[A_order[i]] = stamp
                    for i in range(nb):
                        mark[B_order[i]] = stamp + 1
                    peak = max(peak, na + nb)
                    uA = A_su[0]
                    uB = B_su[0]
                    mA = A_sm[0]
                    mB = B_sm[0]
                    vA = f[k]
                    vB = f[l]
                    s = 1.0 if vB > vA else -1.0

                    # merge
                    gap = vB - vA
                    if uA + uB > 0:
                        dfk = uB * gap / (uA + uB)
                        dfl = -uA * gap / (uA + uB)
                    else:
                        dfk = gap / 2
                        dfl = -gap / 2
                    b_step = max(abs(dfk), abs(dfl))
                    b_kind = MERGE
                    b_edge = e
                    b_dfk = dfk
                    b_dfl = dfl
                    b_side = 0
                    b_target = 0.0
                    b_newc = 0.0

                    # no change
                    if uA > 0 and uB > 0:
                        dc = s - c[e]
                        dfk = dc * lam_e / uA
                        dfl = -dc * lam_e / uB
                        st = max(abs(dfk), abs(dfl))
                        if st < b_step or (st == b_step and (NO_CHANGE < b_kind or (NO_CHANGE == b_kind and e < b_edge))):
                            b_step, b_kind, b_edge, b_dfk, b_dfl = st, NO_CHANGE, e, dfk, dfl

                    # amalgamate, best per side
                    for side in range(2):
                        if side == 0:
                            X_order, nX, fX, fY, uX, uY, d = A_order, na, vA, vB, uA, uB, s
                        else:
                            X_order, nX, fX, fY, uX, uY, d = B_order, nb, vB, vA, uB, uA, -s
                        best_s = np.inf
                        best_j = -1
                        best_delta = 0.0
                        best_fK = 0.0
                        for i in range(nX):
                            v = X_order[i]
                            for a in range(adj_ptr[v], adj_ptr[v + 1]):
                                j = inc_idx[a]
                                cj = c[j]
                                if cj == 0.0 or active[j]:
                                    continue
                                if tail[j] == v:
                                    K = head[j]
                                else:
                                    K = tail[j]
                                    cj = -cj
                                if mark[K] == stamp or mark[K] == stamp + 1:
                                    continue
                                if (cj > 0) != (d > 0):
                                    continue
                                fK = f[K]
                                if (fK - fX) * d < -EPS or (fK - fY) * d >= 0:
                                    continue
                                delta = fK - fX
                                if not (uY > 0 or uX == 0 or abs(delta) <= EPS):
                                    continue
                                other = -uX * delta / uY if uY > 0 else 0.0
                                st = max(abs(delta), abs(other))
                                if st < best_s or (st == best_s and j < best_j):
                                    best_s, best_j, best_delta, best_fK = st, j, delta, fK
                        if best_j >= 0:
                            other = -uX * best_delta / uY if uY > 0 else 0.0
                            if side == 0:
                                dfk, dfl = best_delta, other
                            else:
                                dfk, dfl = other, best_delta
                            st = max(abs(dfk), abs(dfl))
                            if st < b_step or (st == b_step and (AMALGAMATE < b_kind or (AMALGAMATE == b_kind and best_j < b_edge))):
                                b_step, b_kind, b_edge, b_dfk, b_dfl = st, AMALGAMATE, best_j, dfk, dfl
                                b_side, b_target = side, best_fK

                    # split, best per side
                    if uA > 0 and uB > 0:
                        for side in range(2):
                            if side == 0:
                                X_order, X_via, X_su, X_sm, nX, fX, uX, uY, d = A_order, A_via, A_su, A_sm, na, vA, uA, uB, s
                            else:
                                X_order, X_via, X_su, X_sm, nX, fX, uX, uY, d = B_order, B_via, B_su, B_sm, nb, vB, uB, uA, -s
                            ratio = uX / uY
                            best_s = np.inf
                            best_j = -1
                            best_delta = 0.0
                            best_bound = 0.0
                            for i in range(1, nX):
                                uT = X_su[i]
                                if uT <= 0:
                                    continue
                                j = X_via[i]
                                o = 1.0 if tail[j] == X_order[i] else -1.0
                                cj = c[j]
                                lj = lam[j]
                                t0 = cj + o * (uT * fX - X_sm[i]) / lj
                                bound = o * d * abs(cj)
                                delta = (bound - t0) * lj / (o * uT)
                                if delta * d < 0:
                                    if delta * d < -EPS:
                                        continue
                                    delta = 0.0
                                st = max(abs(delta), abs(ratio * delta))
                                if st < best_s or (st == best_s and j < best_j):
                                    best_s, best_j, best_delta, best_bound = st, j, delta, bound
                            if best_j >= 0:
                                other = -uX * best_delta / uY
                                if side == 0:
                                    dfk, dfl = best_delta, other
                                else:
                                    dfk, dfl = other, best_delta
                                st = max(abs(dfk), abs(dfl))
                                if st < b_step or (st == b_step and (SPLIT < b_kind or (SPLIT == b_kind and best_j < b_edge))):
                                    b_step, b_kind, b_edge, b_dfk, b_dfl = st, SPLIT, best_j, dfk, dfl
                                    b_side, b_newc = side, best_bound

                    if uA > 0:
                        b_dc = uA * b_dfk / lam_e
                    elif uB > 0:
                        b_dc = -uB * b_dfl / lam_e
                    else:
                        b_dc = 0.0

                    events += 1
                    done = False
                    if b_kind == MERGE:
                        if uA + uB > 0:
                            val = (uA * vA + uB * vB) / (uA + uB)
                        else:
                            val = 0.5 * (vA + vB)
                        for i in range(na):
                            f[A_order[i]] = val
                        for i in range(nb):
                            f[B_order[i]] = val
                        n_free = _forest_add(e, tail, head, comp, size, free, n_free, active, adj_ptr, adj_cnt, adj_idx, L0, A_via, A_par, st_v, st_e, st_p)
                        _set_c(e, s, c, b, lam, tail, head)
                        done = True
                    elif b_kind == NO_CHANGE:
                        dc = s - c[e]
                        va = (mA + dc * lam_e) / uA
                        vb = (mB - dc * lam_e) / uB
                        for i in range(na):
                            f[A_order[i]] = va
                        for i in range(nb):
                            f[B_order[i]] = vb
                        _set_c(e, s, c, b, lam, tail, head)
                        done = True
                    elif b_kind == AMALGAMATE:
                        if b_side == 0:
                            uX, mX, sx = uA, mA, 1.0
                            uY, mY, vY, fb_ = uB, mB, vB, b_dfl
                        else:
                            uX, mX, sx = uB, mB, -1.0
                            uY, mY, vY, fb_ = uA, mA, vA, b_dfk
                        dc = sx * (uX * b_target - mX) / lam_e if uX > 0 else b_dc
                        if uY > 0:
                            vy = (mY + -sx * dc * lam_e) / uY
                        elif fb_ != 0.0:
                            vy = vY + fb_
                        else:
                            vy = vY
                        if b_side == 0:
                            for i in range(nb):
                                f[B_order[i]] = vy
                            for i in range(na):
                                f[A_order[i]] = b_target
                        else:
                            for i in range(na):
                                f[A_order[i]] = vy
                            for i in range(nb):
                                f[B_order[i]] = b_target
                        _set_c(e, c[e] + dc, c, b, lam, tail, head)
                        n_free = _forest_add(b_edge, tail, head, comp, size, free, n_free, active, adj_ptr, adj_cnt, adj_idx, L0, A_via, A_par, st_v, st_e, st_p)
                    else:
                        if uA > 0:
                            va = (mA + 1.0 * b_dc * lam_e) / uA
                        elif b_dfk != 0.0:
                            va = vA + b_dfk
                        else:
                            va = vA
                        if uB > 0:
                            vb = (mB + -1.0 * b_dc * lam_e) / uB
                        elif b_dfl != 0.0:
                            vb = vB + b_dfl
                        else:
                            vb = vB
                        for i in range(na):
                            f[A_order[i]] = va
                        for i in range(nb):
                            f[B_order[i]] = vb
                        _set_c(e, c[e] + b_dc, c, b, lam, tail, head)
                        seen_stamp += 2
                        n_free = _forest_remove(b_edge, tail, head, comp, size, free, n_free, active, adj_ptr, adj_cnt, adj_idx, seen, seen_stamp, S0, S1, L0, L1)
                        _set_c(b_edge, b_newc, c, b, lam, tail, head)
                    if done:
                        break
                    if events >= limit:
                        status = ITERATION_LIMIT
                        bad_edge = e
                        break
                if status != OK:
                    break
        ev_buf, n_ev = _push(ev_buf, n_ev, events)
        if phase == 0:
            max_region[pos - 1] = max(before, peak, size[comp[k]])
    return f, c, active, ev_buf[:n_ev], max_region, sweeps, status, bad_edge


@njit(cache=True)
def _forest_add(e, tail, head, comp, size, free, n_free, active, adj_ptr, adj_cnt, adj_idx, order, via, parent, st_v, st_e, st_p):
    a = tail[e]
    bb = head[e]
    la = comp[a]
    lb = comp[bb]
    if size[la] >= size[lb]:
        keep, drop, start = la, lb, bb
    else:
        keep, drop, start = lb, la, a
    cnt = _tree(start, -1, adj_ptr, adj_cnt, adj_idx, tail, head, order, via, parent, st_v, st_e, st_p)
    for i in range(cnt):
        comp[order[i]] = keep
    size[keep] += size[drop]
    size[drop] = 0
    free[n_free] = drop
    n_free += 1
    active[e] = True
    _adj_add(a, e, adj_ptr, adj_cnt, adj_idx)
    _adj_add(bb, e, adj_ptr, adj_cnt, adj_idx)
    return n_free


@njit(cache=True)
def _forest_remove(e, tail, head, comp, size, free, n_free, active, adj_ptr, adj_cnt, adj_idx, seen, stamp, S0, S1, L0, L1):
    a = tail[e]
    bb = head[e]
    active[e] = False
    _adj_remove(a, e, adj_ptr, adj_cnt, adj_idx)
    _adj_remove(bb, e, adj_ptr, adj_cnt, adj_idx)
    # explore both sides in lock step; relabel whichever is exhausted first
    seen[a] = stamp
    seen[bb] = stamp + 1
    S0[0] = a
    S1[0] = bb
    L0[0] = a
    L1[0] = bb
    t0 = 1
    t1 = 1
    n0 = 1
    n1 = 1
    side = -1
    while side < 0:
        for sd in range(2):
            if sd == 0:
                if t0 == 0:
                    side = 0
                    break
                t0 -= 1
                v = S0[t0]
            else:
                if t1 == 0:
                    side = 1
                    break
                t1 -= 1
                v = S1[t1]
            for q in range(adj_ptr[v], adj_ptr[v] + adj_cnt[v]):
                j = adj_idx[q]
                x = head[j] if tail[j] == v else tail[j]
                if seen[x] != stamp + sd:
                    seen[x] = stamp + sd
                    if sd == 0:
                        S0[t0] = x
                        t0 += 1
                        L0[n0] = x
                        n0 += 1
                    else:
                        S1[t1] = x
                        t1 += 1
                        L1[n1] = x
                        n1 += 1
    old = comp[a]
    n_free -= 1
    label = free[n_free]
    if side == 0:
        for i in range(n0):
            comp[L0[i]] = label
        size[label] = n0
        size[old] -= n0
    else:
        for i in range(n1):
            comp[L1[i]] = label
        size[label] = n1
        size[old] -= n1
    return n_free
