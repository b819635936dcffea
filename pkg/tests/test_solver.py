import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphtv import errors
from graphtv.graph import GridShape, build_chain, build_grid4, new_graph
from graphtv.schedule import EdgeSchedule, dyadic_grid_order
from graphtv.solver import (EventKind, SolveOptions, SolverState, candidate_events,
                            event_amalgamate, event_merge, event_no_change, event_split,
                            iterate_edge, mean_correction, objective, select_event, solve,
                            working_objective, Event)

from instances import certificate_family, grid, random_tree, sparse_graph

PY = SolveOptions(engine="python")
COMPILED = SolveOptions(engine="compiled")


@pytest.mark.parametrize("lam, expected", [(0.2, (0.2, 0.8)), (0.6, (0.5, 0.5))])
@pytest.mark.parametrize("opts", [PY, COMPILED])
def test_two_vertex_closed_form(lam, expected, opts):
    r = solve(build_chain([0.0, 1.0], [lam]), opts=opts)
    assert np.allclose(r.f, expected, atol=1e-12, rtol=0)
    assert r.certificate.passed


def test_two_vertex_events():
    st_ = SolverState(build_chain([0.0, 1.0], [0.2]))
    nc = event_no_change(st_, st_.g, 0)
    assert (nc.df_k, nc.df_l) == pytest.approx((0.2, -0.2))
    mg = event_merge(st_, st_.g, 0)
    assert (mg.df_k, mg.df_l) == pytest.approx((0.5, -0.5))
    assert select_event(candidate_events(st_, st_.g, 0)).kind is EventKind.NO_CHANGE
    st_ = SolverState(build_chain([0.0, 1.0], [0.6]))
    assert select_event(candidate_events(st_, st_.g, 0)).kind is EventKind.MERGE


def test_merge_step_weighted():
    st_ = SolverState(new_graph(2, [(0, 1, 1.0)], [1.0, 3.0], [0.0, 1.0]))
    ev = event_merge(st_, st_.g, 0)
    assert (ev.df_k, ev.df_l) == pytest.approx((0.75, -0.25))
    st_ = SolverState(new_graph(2, [(0, 1, 1.0)], [0.0, 0.0], [0.0, 1.0]))
    ev = event_merge(st_, st_.g, 0)
    assert (ev.df_k, ev.df_l) == (0.5, -0.5)
    assert event_no_change(st_, st_.g, 0) is None
    assert event_split(st_, st_.g, 0) == []


def test_select_event_tie_break():
    evs = [Event(EventKind.NO_CHANGE, 0.5, -0.5, 1, 0), Event(EventKind.SPLIT, 0.5, 0, 1, 3),
           Event(EventKind.MERGE, 0.5, -0.5, 1, 7), Event(EventKind.SPLIT, 0.5, 0, 1, 2)]
    assert select_event(evs).kind is EventKind.MERGE
    assert select_event(evs[:2] + evs[3:]).edge == 2
    with pytest.raises(errors.NoFeasibleEvent):
        select_event([])


def test_split_candidate_sits_on_force_limit():
    # {0,1} merge cheaply, then the pull of vertex 2 on the region tears edge 0 apart
    g = new_graph(3, [(0, 1, 0.05), (1, 2, 5.0)], [1, 1, 1], [0.0, 0.0, 1.0])
    st_ = SolverState(g)
    iterate_edge(st_, g, 0)
    assert st_.forest.active[0]
    evs = event_split(st_, g, 1)
    assert [e.edge for e in evs] == [0]
    ev = evs[0]
    # at the event the force through edge 0 equals its lambda
    f0 = st_.f[0] + ev.df_k
    assert f0 - g.data[0] - ev.new_c * 0.05 == pytest.approx(0.0, abs=1e-12)
    r = solve(g, opts=PY)
    assert r.certificate.passed and not r.forest.active[0]


def test_amalgamate_candidate():
    # chain 0-1-2: edge 0 set with c != 0 and f0 between f1 and f2
    g = build_chain([0.5, 0.0, 1.0], [0.1, 1.0])
    st_ = SolverState(g)
    iterate_edge(st_, g, 0)
    assert st_.c[0] == -1.0 and st_.f[0] > st_.f[1]
    cands = event_amalgamate(st_, g, 1)
    assert [e.edge for e in cands] == [0]
    assert cands[0].df_k == pytest.approx(st_.f[0] - st_.f[1])
    assert event_amalgamate(SolverState(g), g, 1) == []


@pytest.mark.parametrize("y", [np.full(6, 3.0)])
def test_constant_data(y):
    g = sparse_graph(np.random.default_rng(0), 6, 0.6)
    r = solve(g.with_data(y))
    assert np.all(r.f == 3.0)


def test_tiny_lambda_returns_data():
    g = random_tree(np.random.default_rng(1), 20).with_lambdas(1e-12)
    assert np.max(np.abs(solve(g).f - g.data)) <= 1e-9


def test_objectives():
    g = build_chain([0.0, 1.0], [0.2])
    assert objective(g, [0.2, 0.8]) == pytest.approx(0.16)
    assert objective(g, g.data) == pytest.approx(0.2)
    assert working_objective(g, [0.2, 0.8], [0.0]) == pytest.approx(0.04)


def test_mean_correction():
    g = new_graph(3, [(0, 1, 1.0), (1, 2, 1.0)], [1, 2, 0], [2.0, 4.0, 9.0])
    assert mean_correction(g, [3, 3, 1], [0, 0, 1], skip_empty=True).tolist() == [3, 3, 1]
    assert mean_correction(g, [3, 3, 3], [0, 0, 0]).tolist() == [3, 3, 3]
    with pytest.raises(errors.EmptyRegionMean):
        mean_correction(g, [3, 3, 1], [0, 0, 1])
    assert mean_correction(g, [0, 1, 2], [0, 1, 1], skip_empty=True).tolist() == [2, 4, 4]


def test_bad_schedule():
    g = build_chain([0.0, 1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        solve(g, EdgeSchedule((0, 0)))
    with pytest.raises(ValueError):
        solve(g, opts=SolveOptions(engine="gpu"))


def test_iteration_limit_is_reported():
    g = grid(np.random.default_rng(3), 4, 4)
    with pytest.raises(errors.IterationLimitExceeded):
        solve(g, opts=SolveOptions(engine="python", event_limit_factor=0))


@st.composite
def graphs(draw):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(2, 25))
    zero = draw(st.sampled_from([0.0, 0.3]))
    return sparse_graph(np.random.default_rng(seed), n, 0.25, zero_frac=zero)


@given(graphs())
def test_engines_agree_bitwise(g):
    a, b = solve(g, opts=PY), solve(g, opts=COMPILED)
    assert np.array_equal(a.f, b.f) and np.array_equal(a.c, b.c)
    assert a.active_edges == b.active_edges
    assert a.events_per_iteration == b.events_per_iteration
    assert a.max_region == b.max_region


@given(graphs())
def test_terminal_invariants(g):
    r = solve(g, opts=SolveOptions(engine="python", trace=True))
    assert r.certificate.passed
    assert np.all(np.abs(r.c) <= 1)
    for e in r.active_edges:
        assert r.f[g.tail[e]] == r.f[g.head[e]]
    assert working_objective(g, r.f, r.c) == pytest.approx(objective(g, r.f), abs=1e-12)
    q = [working_objective(g, g.data, np.zeros(g.n_edges))] + [t.q_working for t in r.trace]
    assert min(np.diff(q), default=0.0) >= -1e-12
    assert max(r.events_per_iteration, default=0) <= 2 * g.n_edges + 1


@given(st.integers(0, 2 ** 32 - 1))
def test_satisfied_edges_stay_satisfied(seed):
    g = sparse_graph(np.random.default_rng(seed), 15, 0.3)
    st_ = SolverState(g)
    for e in range(g.n_edges):
        k, l = st_.tail[e], st_.head[e]
        gap_before = abs(st_.f[l] - st_.f[k])
        iterate_edge(st_, g, e)
        assert abs(st_.f[l] - st_.f[k]) <= gap_before
        for j in range(g.n_edges):
            if st_.satisfied[j]:
                assert st_.holds(j)


def test_gap_shrinks_within_iteration():
    g = certificate_family(5, 8)[2]
    r = solve(g, opts=SolveOptions(engine="python", trace=True))
    by_iter = {}
    for t in r.trace:
        by_iter.setdefault(t.iteration, []).append(t)
    for recs in by_iter.values():
        for t in recs:
            # the two sides never move apart
            assert t.df_k * t.df_l <= 0 or t.df_k == 0 or t.df_l == 0


@pytest.mark.parametrize("seed", range(3))
def test_schedules_agree_on_grid(seed):
    sh = GridShape(8, 8)
    y = np.random.default_rng(seed).random((8, 8))
    g = build_grid4(sh, y, 0.15)
    a = solve(g)
    b = solve(g, dyadic_grid_order(sh))
    assert np.max(np.abs(a.f - b.f)) <= 1e-8
    assert all(m <= 4 ** p for m, p in zip(b.max_region, dyadic_grid_order(sh).stage))


def test_nonfinite_rejected():
    g = build_chain([0.0, 1.0], [1.0])
    object.__setattr__(g, "data", np.array([0.0, math.inf]))
    with pytest.raises(errors.NonFiniteData):
        solve(g)
