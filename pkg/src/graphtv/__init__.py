"""Exact total-variation penalized regression on graphs."""

from .errors import DataError, GraphTVError, NumericalError
from .graph import (Graph, GridShape, augment_baseline, build_chain, build_delaunay_graph,
                    build_grid4, new_graph)
from .oracle import brute_force_minimize, check_certificate
from .params import (NoiseEstimate, SqueezeConfig, estimate_sigma, local_squeezing,
                     multiresolution_check, solve_discrepancy)
from .schedule import EdgeSchedule, dyadic_grid_order, natural_order
from .solver import SolveOptions, SolveResult, mean_correction, objective, solve, working_objective

__all__ = [
    "DataError", "GraphTVError", "NumericalError", "Graph", "GridShape", "augment_baseline",
    "build_chain", "build_delaunay_graph", "build_grid4", "new_graph", "brute_force_minimize",
    "check_certificate", "NoiseEstimate", "SqueezeConfig", "estimate_sigma", "local_squeezing",
    "multiresolution_check", "solve_discrepancy", "EdgeSchedule", "dyadic_grid_order",
    "natural_order", "SolveOptions", "SolveResult", "mean_correction", "objective", "solve",
    "working_objective",
]
