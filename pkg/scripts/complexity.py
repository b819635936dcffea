"""Runtime of dyadic-scheduled image solves against image size, with the
fitted log-log slope against both side length and pixel count."""

import argparse
import time

import numpy as np

from graphtv.datasets import rng_for
from graphtv.graph import GridShape, build_grid4
from graphtv.schedule import dyadic_grid_order, natural_order
from graphtv.solver import SolveOptions, solve


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    p.add_argument("--lam", type=float, default=0.3)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--natural", action="store_true", help="also time the natural edge order")
    args = p.parse_args(argv)

    opts = SolveOptions(check=False)
    solve(build_grid4(GridShape(4, 4), np.zeros((4, 4)), args.lam))  # compile once
    rows = []
    for eta in args.sizes:
        sh = GridShape(eta, eta)
        g = build_grid4(sh, rng_for(eta).random((eta, eta)), args.lam)
        orders = [("dyadic", dyadic_grid_order(sh))] + ([("natural", natural_order(g))] if args.natural else [])
        for name, order in orders:
            best = min(_timed(g, order, opts) for _ in range(args.repeats))
            r = solve(g, order, opts)
            rows.append((name, eta, best))
            print(f"{name:8s} eta={eta:4d} n={eta * eta:6d} {best:8.3f}s events={r.n_events} "
                  f"largest region={max(r.max_region)}")
    etas = np.array([e for name, e, _ in rows if name == "dyadic"], dtype=float)
    ts = np.array([t for name, _, t in rows if name == "dyadic"])
    if len(etas) > 1:
        print(f"dyadic slope: {np.polyfit(np.log(etas * etas), np.log(ts), 1)[0]:.2f} vs n, "
              f"{np.polyfit(np.log(etas), np.log(ts), 1)[0]:.2f} vs side length")


def _timed(g, order, opts):
    t0 = time.perf_counter()
    solve(g, order, opts)
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
