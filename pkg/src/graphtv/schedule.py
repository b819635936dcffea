"""Orders in which edges are brought to their final coefficient.

For pixel grids the dyadic order grows the satisfied part of the image in
blocks of 2^p x 2^p pixels, which keeps every region the solver touches
small until the last stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2
from typing import Optional

import numpy as np

from .graph import Graph, GridShape, grid_edge_index


@dataclass(frozen=True)
class EdgeSchedule:
    order: tuple[int, ...]
    stage: Optional[tuple[int, ...]] = None  # stage number of each position, if staged

    def __len__(self):
        return len(self.order)

    def is_permutation_of(self, n_edges: int) -> bool:
        return len(self.order) == n_edges and sorted(self.order) == list(range(n_edges))


def natural_order(g: Graph) -> EdgeSchedule:
    return EdgeSchedule(tuple(range(g.n_edges)))


def n_stages(shape: GridShape) -> int:
    longest = max(shape.n1, shape.n2)
    return 0 if longest == 1 else ceil(log2(longest))


def dyadic_grid_order(shape: GridShape) -> EdgeSchedule:
    """Stage p joins the 2^(p-1)-blocks across the cuts at 1-based position
    2^p q - 2^(p-1): first all column cuts, then all row cuts, each in
    (q, i) order. Cuts falling on or past the border are skipped."""
    n1, n2 = shape.n1, shape.n2
    order, stage = [], []
    for p in range(1, n_stages(shape) + 1):
        step, half = 2 ** p, 2 ** (p - 1)
        for q in range(1, ceil(n2 / step) + 1):
            col = step * q - half
            if col < n2:
                for i in range(n1):
                    order.append(grid_edge_index(shape, i, col - 1, vertical=False))
                    stage.append(p)
        for q in range(1, ceil(n1 / step) + 1):
            row = step * q - half
            if row < n1:
                for i in range(n2):
                    order.append(grid_edge_index(shape, row - 1, i, vertical=True))
                    stage.append(p)
    return EdgeSchedule(tuple(order), tuple(stage))


def max_region_bound(shape: GridShape, p: int) -> int:
    """Largest region possible while stage p is being processed."""
    return int(min(4 ** min(p, 64), shape.size))


def schedule_for(g: Graph, name: str = "natural") -> EdgeSchedule:
    if name == "natural":
        return natural_order(g)
    if name == "dyadic":
        if g.shape is None:
            raise ValueError("the dyadic schedule needs a grid graph")
        return dyadic_grid_order(g.shape)
    raise ValueError(f"unknown schedule {name!r}")


def stage_sizes(s: EdgeSchedule) -> dict[int, int]:
    if s.stage is None:
        return {}
    vals, counts = np.unique(s.stage, return_counts=True)
    return dict(zip(vals.tolist(), counts.tolist()))
