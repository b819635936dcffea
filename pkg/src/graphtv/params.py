"""Choosing the smoothing parameters: a robust noise level estimate, a
global lambda matched to that noise level, and per-edge lambdas for
chains driven by a multiresolution check on the residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import errors
from .graph import Graph, build_chain, connected_components
from .schedule import EdgeSchedule
from .solver import SolveOptions, SolveResult, solve

SIGMA_SCALE = 1.48 / math.sqrt(2.0)


@dataclass(frozen=True)
class NoiseEstimate:
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise errors.NonPositiveSigma(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class SqueezeConfig:
    threshold_multiplier: float = 2.5
    reduction_factor: float = 0.5
    max_rounds: int = 40
    initial_lambda: Optional[float] = None  # None: 2 sigma sqrt(n)

    def __post_init__(self):
        if not (self.threshold_multiplier > 0 and 0 < self.reduction_factor < 1 and self.max_rounds > 0):
            raise ValueError("threshold_multiplier > 0, 0 < reduction_factor < 1 and max_rounds > 0 required")
        if self.initial_lambda is not None and not self.initial_lambda > 0:
            raise errors.NonPositiveLambda("initial_lambda must be positive")


def estimate_sigma(g: Graph) -> NoiseEstimate:
    """1.48/sqrt(2) times the median absolute difference across edges."""
    if g.n_edges == 0:
        raise errors.NoEdges("noise estimate needs at least one edge")
    d = np.abs(g.data[g.head] - g.data[g.tail])
    return NoiseEstimate(float(SIGMA_SCALE * np.median(d)))


# -- global lambda ------------------------------------------------------------

@dataclass
class DiscrepancyResult:
    lam: float
    f: np.ndarray
    residual: float
    target: float
    n_solves: int
    result: SolveResult


def _rss(g: Graph, f) -> float:
    return math.fsum((f - g.data) ** 2)


def constant_fit(g: Graph) -> np.ndarray:
    """Limit of the fit as lambda grows: weighted mean per connected component."""
    lab = connected_components(g)
    k = lab.max() + 1
    u = np.bincount(lab, weights=g.weights, minlength=k)
    m = np.bincount(lab, weights=g.weights * g.data, minlength=k)
    plain = np.bincount(lab, weights=g.data, minlength=k) / np.bincount(lab, minlength=k)
    return np.where(u > 0, m / np.where(u > 0, u, 1.0), plain)[lab]


def solve_discrepancy(g: Graph, sigma: float, schedule: Optional[EdgeSchedule] = None,
                      rtol: float = 1e-3, max_solves: int = 60,
                      lam0: Optional[float] = None) -> DiscrepancyResult:
    """Global lambda (the same on every edge) whose fit leaves a residual
    sum of squares of sigma^2 n.

    Doubles lambda from ``lam0`` (default sigma) until the residual is
    large enough, then bisects.
    """
    if not sigma > 0:
        raise errors.NonPositiveSigma(f"sigma must be positive, got {sigma}")
    target = sigma ** 2 * g.n_vertices
    ceiling = _rss(g, constant_fit(g))
    if target > ceiling * (1 + rtol):
        raise errors.TargetUnreachable(
            f"target residual {target:.6g} exceeds the constant-fit residual {ceiling:.6g}")

    opts = SolveOptions(check=False)
    solves = 0

    def run(lam):
        nonlocal solves
        solves += 1
        r = solve(g.with_lambdas(lam), schedule, opts)
        return r, _rss(g, r.f)

    def close(rss):
        return abs(rss - target) <= rtol * target

    lo, hi = 0.0, float(lam0 if lam0 is not None else sigma)
    r, rss = run(hi)
    while rss < target and not close(rss):
        if solves >= max_solves:
            raise errors.NotConverged("could not bracket the target residual")
        lo, hi = hi, 2 * hi
        r, rss = run(hi)
    best = (hi, r, rss)
    while not close(best[2]):
        if solves >= max_solves:
            raise errors.NotConverged(f"bisection did not reach the target in {max_solves} solves")
        mid = 0.5 * (lo + hi)
        r, rss = run(mid)
        if rss < target:
            lo = mid
        else:
            hi = mid
        best = (mid, r, rss)
    lam, r, rss = best
    return DiscrepancyResult(lam, r.f, rss, target, solves, r)


# -- local squeezing on chains ------------------------------------------------

def dyadic_intervals(n: int) -> list[tuple[int, int]]:
    """Half-open intervals [a, b) of lengths 1, 2, 4, ... aligned to
    multiples of their length and contained in [0, n)."""
    out = []
    size = 1
    while size <= n:
        out += [(a, a + size) for a in range(0, n - size + 1, size)]
        size *= 2
    return out


def multiresolution_check(residuals, sigma: float, intervals, multiplier: float = 2.5) -> list[tuple[int, int]]:
    """Intervals whose residual sum exceeds sigma * multiplier * sqrt(|I| log n)."""
    if not sigma > 0:
        raise errors.NonPositiveSigma(f"sigma must be positive, got {sigma}")
    r = np.asarray(residuals, dtype=float)
    n = len(r)
    cs = np.concatenate([[0.0], np.cumsum(r)])
    logn = math.log(max(n, 2))
    out = []
    for a, b in intervals:
        if abs(cs[b] - cs[a]) > sigma * multiplier * math.sqrt((b - a) * logn):
            out.append((a, b))
    return out


@dataclass
class SqueezeResult:
    lambdas: np.ndarray
    f: np.ndarray
    rounds: int
    converged: bool
    sigma: float
    result: SolveResult


def local_squeezing(y, cfg: SqueezeConfig = SqueezeConfig(), sigma: Optional[float] = None,
                    weights=None) -> SqueezeResult:
    """Per-edge lambdas for a chain: start smooth and halve lambda on every
    edge touching an interval whose residuals fail the multiresolution check."""
    y = np.asarray(y, dtype=float).reshape(-1)
    n = len(y)
    if n < 2:
        raise errors.TooFewPoints("local squeezing needs at least two points")
    if sigma is None:
        sigma = estimate_sigma(build_chain(y, np.ones(n - 1), weights)).sigma
    if not sigma > 0:
        raise errors.NonPositiveSigma("noise estimate is zero; pass sigma explicitly")
    lam0 = cfg.initial_lambda if cfg.initial_lambda is not None else 2 * sigma * math.sqrt(n)
    lams = np.full(n - 1, float(lam0))
    intervals = dyadic_intervals(n)
    opts = SolveOptions(check=False)
    rounds = 0
    while True:
        g = build_chain(y, lams, weights)
        r = solve(g, opts=opts)
        bad = multiresolution_check(y - r.f, sigma, intervals, cfg.threshold_multiplier)
        if not bad or rounds >= cfg.max_rounds:
            return SqueezeResult(lams, r.f, rounds, not bad, sigma, r)
        hit = np.zeros(n - 1, dtype=bool)
        for a, b in bad:
            # edge i joins points i and i+1; reduce every edge touching the interval
            hit[max(a - 1, 0):min(b, n - 1)] = True
        lams = np.where(hit, lams * cfg.reduction_factor, lams)
        rounds += 1
