import pytest
from hypothesis import given, strategies as st

from graphtv.graph import GridShape, build_grid4, build_chain
from graphtv.schedule import (dyadic_grid_order, max_region_bound, n_stages, natural_order,
                              schedule_for, stage_sizes)
import numpy as np


@given(st.integers(1, 20), st.integers(1, 20))
def test_dyadic_is_permutation(n1, n2):
    sh = GridShape(n1, n2)
    s = dyadic_grid_order(sh)
    n_edges = n1 * (n2 - 1) + (n1 - 1) * n2
    assert s.is_permutation_of(n_edges)
    assert list(s.stage) == sorted(s.stage)


def test_stage_layout_4x4():
    s = dyadic_grid_order(GridShape(4, 4))
    assert n_stages(GridShape(4, 4)) == 2
    # stage 1: cuts after columns 1 and 3 (4 rows each), then rows 1 and 3
    assert stage_sizes(s) == {1: 16, 2: 8}
    assert s.order[:4] == (0, 3, 6, 9)


def test_region_bound_and_names():
    assert max_region_bound(GridShape(16, 16), 1) == 4
    assert max_region_bound(GridShape(16, 16), 9) == 256
    g = build_grid4(GridShape(3, 3), np.zeros((3, 3)))
    assert schedule_for(g, "natural") == natural_order(g)
    with pytest.raises(ValueError):
        schedule_for(build_chain([0.0, 1.0], [1.0]), "dyadic")
    with pytest.raises(ValueError):
        schedule_for(g, "spiral")
