"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 numerical
failure (including a certificate that does not verify).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from . import errors, io
from .delaunay import PointSet
from .graph import augment_baseline, build_chain, build_delaunay_graph, build_grid4
from .oracle import check_certificate
from .params import SqueezeConfig, estimate_sigma, local_squeezing, solve_discrepancy
from .schedule import schedule_for
from .solver import SolveOptions, mean_correction, solve


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _baseline(text: str):
    return "auto" if text == "auto" else _positive(text)


def _in_text(path: str):
    return sys.stdin if path == "-" else path


def _in_bytes(path: str):
    return sys.stdin.buffer if path == "-" else path


def _out_text(path: Optional[str]):
    return sys.stdout if path in (None, "-") else path


def _note(msg: str):
    print(msg, file=sys.stderr)


def _add_lambda_group(p, squeeze: bool = False):
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--lambda", dest="lam", type=_positive, help="fixed smoothing parameter on every edge")
    grp.add_argument("--auto", action="store_true", help="choose a global lambda by the discrepancy rule")
    if squeeze:
        grp.add_argument("--squeeze", action="store_true", help="per-edge lambdas by local squeezing")
    p.add_argument("--sigma", type=_positive, help="noise level (default: estimated from the data)")


def _solve_opts(args) -> SolveOptions:
    return SolveOptions(trace=bool(getattr(args, "trace", None)))


def _write_trace(args, result):
    if getattr(args, "trace", None):
        if result.trace is None:
            raise errors.NumericalError("no trace recorded")
        io.write_trace(args.trace, result.trace)


def _global_fit(g, args, schedule=None):
    """Solve with --lambda or --auto; returns (result, lambda, sigma)."""
    if args.auto:
        sigma = args.sigma if args.sigma is not None else estimate_sigma(g).sigma
        d = solve_discrepancy(g, sigma, schedule)
        _note(f"sigma={sigma!r} lambda={d.lam!r} rss={d.residual!r} target={d.target!r}")
        lam = d.lam
    else:
        sigma, lam = args.sigma, args.lam
    r = solve(g.with_lambdas(lam), schedule, _solve_opts(args))
    return r, lam, sigma


# -- subcommands --------------------------------------------------------------------

def cmd_chain(args) -> int:
    x, y = io.read_csv_signal(_in_text(args.input))
    n = len(y)
    if n < 2:
        raise errors.TooFewPoints("a chain needs at least two points")
    if args.squeeze:
        sq = local_squeezing(y, SqueezeConfig(), sigma=args.sigma)
        _note(f"squeezing: rounds={sq.rounds} converged={sq.converged} sigma={sq.sigma!r}")
        lams = sq.lambdas
        chain = build_chain(y, lams)
        r = sq.result
    else:
        chain = build_chain(y, np.ones(n - 1))
        r, lam, _ = _global_fit(chain, args)
        lams = np.full(n - 1, lam)
        chain = chain.with_lambdas(lams)

    g = chain
    if args.baseline is not None:
        lam_b = float(lams.min()) if args.baseline == "auto" else args.baseline
        _note(f"baseline lambda={lam_b!r}")
        g = augment_baseline(chain, lam_b)
        r = solve(g, opts=_solve_opts(args))
    elif args.trace and r.trace is None:
        r = solve(g, opts=_solve_opts(args))
    f = r.f
    if args.mean_correct:
        f = mean_correction(g, f, r.regions, skip_empty=True)
    cols = {"x": x, "y": y, "fit": f[:n]}
    if args.regions:
        cols["region"] = r.regions[:n]
    io.write_csv_fit(_out_text(args.output), cols)
    _write_trace(args, r)
    return 0


def cmd_image(args) -> int:
    buf = io.read_pgm(_in_bytes(args.input))
    g = build_grid4(buf.shape, buf.pixels)
    sched = schedule_for(g, args.schedule)
    r, lam, sigma = _global_fit(g, args, sched)
    fit = r.f.reshape(buf.shape.n1, buf.shape.n2)
    out = io.ImageBuffer(buf.shape, fit, buf.maxval, buf.magic)
    if args.output in (None, "-"):
        io.write_pgm(out, sys.stdout.buffer)
    else:
        io.write_pgm(out, args.output)
    if args.csv:
        i, j = np.divmod(np.arange(g.n_vertices), buf.shape.n2)
        cols = {"row": i, "col": j, "y": g.data, "fit": r.f}
        if args.regions:
            cols["region"] = r.regions
        io.write_csv_fit(args.csv, cols)
    _write_trace(args, r)
    return 0


def cmd_scatter(args) -> int:
    data = io.read_csv_scatter(_in_text(args.input))
    if len(data) < 3:
        raise errors.TooFewPoints("scatter smoothing needs at least 3 points")
    ps = PointSet.from_coords(data.coords)
    r, lam, sigma = _global_fit(build_delaunay_graph(ps, data.y), args)
    # fitted value per input row (rows sharing a point share the fit)
    fit = r.f[ps.index]
    cols = {"x1": data.x1, "x2": data.x2, "y": data.y, "fit": fit}
    if args.regions:
        cols["region"] = r.regions[ps.index]
    io.write_csv_fit(_out_text(args.output), cols)
    _write_trace(args, r)
    return 0


def cmd_simulate(args) -> int:
    from .datasets import generate_simulation

    io.write_scatter(_out_text(args.output), generate_simulation(args.n, args.sd, args.seed))
    return 0


def cmd_solve(args) -> int:
    g = io.read_edge_list(_in_text(args.graph))
    r = solve(g, opts=_solve_opts(args))
    cols = {"vertex": np.arange(g.n_vertices), "fit": r.f}
    if args.regions:
        cols["region"] = r.regions
    io.write_csv_fit(_out_text(args.output), cols)
    if args.state:
        io.write_state(args.state, r.c, r.active_edges)
    _write_trace(args, r)
    return 0


def cmd_verify(args) -> int:
    g = io.read_edge_list(args.graph)
    f = io.read_vector(args.fit)
    if args.state:
        c, active = io.read_state(args.state)
    else:
        r = solve(g)
        c, active = r.c, r.active_edges
    report = check_certificate(g, f, c, active, tol=args.tol)
    print(report)
    return 0 if report.passed else 3


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphtv", description="Exact total-variation penalized regression on graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("chain", help="denoise a 1-D signal given as x,y CSV")
    c.add_argument("input", nargs="?", default="-")
    _add_lambda_group(c, squeeze=True)
    c.add_argument("--baseline", type=_baseline, help="add a baseline vertex; lambda_b or 'auto'")
    c.add_argument("--mean-correct", action="store_true", help="reset each region to its data mean")
    c.add_argument("--regions", action="store_true", help="add a region id column")
    c.add_argument("--trace", help="write the event log here")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_chain)

    i = sub.add_parser("image", help="denoise a PGM image")
    i.add_argument("input")
    _add_lambda_group(i)
    i.add_argument("--schedule", choices=("natural", "dyadic"), default="dyadic")
    i.add_argument("--csv", help="also write row,col,y,fit as CSV")
    i.add_argument("--regions", action="store_true", help="add a region id column to --csv")
    i.add_argument("--trace", help="write the event log here")
    i.add_argument("-o", "--output")
    i.set_defaults(func=cmd_image)

    s = sub.add_parser("scatter", help="smooth x1,x2,y scatter data over its Delaunay graph")
    s.add_argument("input", nargs="?", default="-")
    _add_lambda_group(s)
    s.add_argument("--regions", action="store_true")
    s.add_argument("--trace")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_scatter)

    m = sub.add_parser("simulate", help="write the three-bump test data as CSV")
    m.add_argument("-n", type=int, default=1000)
    m.add_argument("--sd", type=float, default=0.05)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_simulate)

    v = sub.add_parser("solve", help="solve a graph given as an edge list")
    v.add_argument("graph", nargs="?", default="-")
    v.add_argument("--state", help="write per-edge 'c active' lines here")
    v.add_argument("--regions", action="store_true")
    v.add_argument("--trace")
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_solve)

    k = sub.add_parser("verify", help="check optimality of a fit")
    k.add_argument("graph")
    k.add_argument("fit")
    k.add_argument("--state", help="state file from 'solve --state'; default: re-solve")
    k.add_argument("--tol", type=float, default=1e-8)
    k.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except errors.DataError as exc:
        _note(f"graphtv: data error: {exc}")
        return 2
    except OSError as exc:
        _note(f"graphtv: {exc}")
        return 2
    except errors.NumericalError as exc:
        _note(f"graphtv: numerical failure: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
