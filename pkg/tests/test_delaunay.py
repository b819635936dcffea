import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import Delaunay

from graphtv import errors
from graphtv.delaunay import PointSet, delaunay_triangulate, incircle, orient2d, triangle_edges
from graphtv.oracle import delaunay_violations


def test_unit_square_tie_break():
    assert delaunay_triangulate([(0, 0), (1, 0), (1, 1), (0, 1)]) == [(0, 1, 2), (0, 2, 3)]


def test_degenerate_inputs():
    with pytest.raises(errors.TooFewPoints):
        delaunay_triangulate([(0, 0), (1, 1)])
    with pytest.raises(errors.AllCollinear):
        delaunay_triangulate([(0, 0), (1, 1), (2, 2), (3, 3)])


def test_predicates():
    assert orient2d((0, 0), (1, 0), (0, 1)) > 0
    assert orient2d((0, 0), (1, 0), (2, 0)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (0.5, 0.5)) > 0
    assert incircle((0, 0), (1, 0), (0, 1), (1, 1)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (2, 2)) < 0


def test_pointset_dedup_keeps_first_appearance():
    ps = PointSet.from_coords([(1, 1), (0, 0), (1, 1), (2, 0)])
    assert ps.points.tolist() == [[1, 1], [0, 0], [2, 0]]
    assert ps.index.tolist() == [0, 1, 0, 2]


def test_grid_points_triangle_count():
    xy = np.array([(i, j) for i in range(6) for j in range(6)], dtype=float)
    tris = delaunay_triangulate(xy)
    assert len(tris) == 50
    assert delaunay_violations(xy, tris) == 0


@pytest.mark.parametrize("seed", range(10))
def test_matches_scipy_edges_in_general_position(seed):
    xy = np.random.default_rng(seed).random((150, 2))
    ours = set(triangle_edges(delaunay_triangulate(xy)))
    ref = set()
    for s in Delaunay(xy).simplices:
        for a, b in ((s[0], s[1]), (s[1], s[2]), (s[0], s[2])):
            ref.add((min(a, b), max(a, b)))
    assert ours == ref


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=3, max_size=30))
def test_lattice_points_are_delaunay(coords):
    # integer lattices are full of co-circular quadruples
    xy = np.array(coords, dtype=float)
    ps = PointSet.from_coords(xy)
    try:
        tris = delaunay_triangulate(ps)
    except (errors.TooFewPoints, errors.AllCollinear):
        return
    assert delaunay_violations(ps.points, tris) == 0
    # Euler: triangles = 2n - 2 - hull vertices
    assert all(orient2d(ps.points[a], ps.points[b], ps.points[c]) > 0 for a, b, c in tris)
