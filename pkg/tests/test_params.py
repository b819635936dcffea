import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphtv import errors
from graphtv.graph import GridShape, build_chain, build_grid4, new_graph
from graphtv.params import (SIGMA_SCALE, SqueezeConfig, dyadic_intervals, estimate_sigma,
                            local_squeezing, multiresolution_check, solve_discrepancy)
from graphtv.solver import solve

finite = st.floats(-100, 100, allow_nan=False)


def test_sigma_alternating_chain():
    g = build_chain([0, 1, 0, 1, 0], np.ones(4))
    assert estimate_sigma(g).sigma == pytest.approx(1.046518, abs=1e-6)
    assert estimate_sigma(g).sigma == SIGMA_SCALE


def test_sigma_even_median_and_constant():
    g = build_chain([0, 1, 3, 6, 10], np.ones(4))  # diffs 1 2 3 4
    assert estimate_sigma(g).sigma == pytest.approx(SIGMA_SCALE * 2.5)
    assert estimate_sigma(build_chain([3, 3, 3], [1, 1])).sigma == 0.0
    with pytest.raises(errors.NoEdges):
        estimate_sigma(new_graph(1, [], [1.0], [0.0]))


@given(st.lists(finite, min_size=2, max_size=30), st.floats(0.01, 100), finite)
def test_sigma_equivariance(y, scale, shift):
    g = build_chain(y, np.ones(len(y) - 1))
    s = estimate_sigma(g).sigma
    scaled = estimate_sigma(g.with_data(np.asarray(y) * scale)).sigma
    shifted = estimate_sigma(g.with_data(np.asarray(y) + shift)).sigma
    assert scaled == pytest.approx(scale * s, rel=1e-9, abs=1e-9)
    assert shifted == pytest.approx(s, rel=1e-6, abs=1e-9)


def test_discrepancy_two_vertex():
    g = build_chain([0.0, 1.0], [1.0])
    d = solve_discrepancy(g, 0.2)
    assert d.lam == pytest.approx(0.2, rel=1e-3)
    assert abs(d.residual - 0.08) <= 1e-3 * 0.08
    assert np.allclose(d.f, [d.lam, 1 - d.lam])


def test_discrepancy_hits_target_and_is_reproducible():
    rng = np.random.default_rng(4)
    y = np.repeat([0.0, 1.0, 0.3], 20) + rng.normal(0, 0.1, 60)
    g = build_chain(y, np.ones(59))
    a = solve_discrepancy(g, 0.1)
    b = solve_discrepancy(g, 0.1)
    assert abs(a.residual - a.target) <= 1e-3 * a.target
    assert a.lam == b.lam and np.array_equal(a.f, b.f)
    assert a.n_solves <= 60


def test_discrepancy_small_sigma_gives_data():
    g = build_chain([0.0, 1.0, 0.5, 2.0], np.ones(3))
    d = solve_discrepancy(g, 1e-6)
    assert d.lam < 1e-5
    assert np.max(np.abs(d.f - g.data)) < 1e-5


def test_discrepancy_errors():
    g = build_chain([0.0, 1.0], [1.0])
    with pytest.raises(errors.TargetUnreachable):
        solve_discrepancy(g, 1.0)
    with pytest.raises(errors.NonPositiveSigma):
        solve_discrepancy(g, 0.0)


def test_residual_monotone_in_lambda():
    sh = GridShape(8, 8)
    g = build_grid4(sh, np.random.default_rng(7).random((8, 8)))
    rss = [float(np.sum((solve(g.with_lambdas(lam)).f - g.data) ** 2)) for lam in np.geomspace(1e-3, 3, 25)]
    assert all(b >= a - 1e-12 for a, b in zip(rss, rss[1:]))


def test_dyadic_intervals():
    assert dyadic_intervals(5) == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (2, 4), (0, 4)]
    assert dyadic_intervals(1) == [(0, 1)]


def test_multiresolution_examples():
    iv = dyadic_intervals(16)
    assert multiresolution_check(np.zeros(16), 1.0, iv) == []
    r = np.zeros(16)
    r[4:8] = 10.0
    assert (4, 8) in multiresolution_check(r, 1.0, iv)
    with pytest.raises(errors.NonPositiveSigma):
        multiresolution_check(r, 0.0, iv)


def test_multiresolution_false_alarm_rate():
    n = 256
    iv = dyadic_intervals(n)
    flagged = total = 0
    for seed in range(100):
        r = np.random.default_rng(seed).normal(0, 0.7, n)
        flagged += len(multiresolution_check(r, 0.7, iv))
        total += len(iv)
    assert flagged / total < 0.05


def test_squeeze_pure_noise():
    y = np.random.default_rng(0).normal(0, 1, 128)
    sq = local_squeezing(y)
    assert sq.converged
    assert len(np.unique(sq.result.regions)) <= 10


def test_squeeze_step():
    n = 64
    y = np.r_[np.zeros(n), np.ones(n)] + np.random.default_rng(1).normal(0, 1e-3, 2 * n)
    sq = local_squeezing(y)
    jumps = np.flatnonzero(np.abs(np.diff(sq.f)) > 0.5)
    assert len(jumps) == 1 and abs(jumps[0] - (n - 1)) <= 2


def test_squeeze_only_reduces():
    rng = np.random.default_rng(2)
    y = np.repeat([0.0, 3.0, 1.0, 4.0], 16) + rng.normal(0, 0.3, 64)
    cfg = SqueezeConfig()
    full = local_squeezing(y, cfg)
    lam0 = 2 * full.sigma * math.sqrt(len(y))
    assert np.all(full.lambdas <= lam0)
    assert np.all(np.log2(lam0 / full.lambdas) % 1 < 1e-9)


def test_squeeze_two_points():
    sq = local_squeezing([0.0, 1.0], sigma=1.0)
    assert sq.converged and sq.rounds == 0 and len(sq.lambdas) == 1
    sq = local_squeezing([0.0, 100.0], sigma=1.0)
    assert sq.rounds >= 1 and sq.lambdas[0] < 2 * math.sqrt(2)


def test_squeeze_config_validation():
    with pytest.raises(ValueError):
        SqueezeConfig(reduction_factor=1.0)
    with pytest.raises(errors.NonPositiveLambda):
        SqueezeConfig(initial_lambda=0.0)
    with pytest.raises(errors.TooFewPoints):
        local_squeezing([1.0])
