import csv
import io as stdio
import subprocess
import sys

import numpy as np
import pytest

from graphtv import io
from graphtv.cli import main
from graphtv.datasets import noisy_image, piecewise_image, spike_signal
from graphtv.graph import GridShape, build_chain, build_grid4
from graphtv.params import estimate_sigma

from instances import sparse_graph


def run(*args, stdin=None):
    return subprocess.run([sys.executable, "-m", "graphtv.cli", *args], input=stdin,
                          capture_output=True, text=True)


def rows(text):
    return list(csv.DictReader(stdio.StringIO(text)))


def test_simulate_scatter_pipeline():
    sim = run("simulate", "-n", "1000", "--sd", "0.05", "--seed", "7")
    assert sim.returncode == 0
    out = run("scatter", "--auto", "--regions", stdin=sim.stdout)
    assert out.returncode == 0, out.stderr
    table = rows(out.stdout)
    assert len(table) == 1000 and set(table[0]) == {"x1", "x2", "y", "fit", "region"}
    assert run("scatter", "--auto", stdin=sim.stdout).stdout == run("scatter", "--auto", stdin=sim.stdout).stdout


def test_chain_fixed_lambda(tmp_path):
    src = tmp_path / "s.csv"
    src.write_text("x,y\n1,1\n0,0\n")
    assert main(["chain", str(src), "--lambda", "0.2", "-o", str(tmp_path / "o.csv")]) == 0
    table = rows((tmp_path / "o.csv").read_text())
    assert [float(r["fit"]) for r in table] == pytest.approx([0.2, 0.8], abs=1e-12)


def test_chain_squeeze_baseline(tmp_path):
    s = spike_signal(seed=3)
    src = tmp_path / "s.csv"
    io.write_csv_fit(src, {"x": s.x, "y": s.y})
    trace = tmp_path / "t.txt"
    code = main(["chain", str(src), "--squeeze", "--baseline", "auto", "--mean-correct", "--regions",
                 "--trace", str(trace), "-o", str(tmp_path / "o.csv")])
    assert code == 0
    fit = np.array([float(r["fit"]) for r in rows((tmp_path / "o.csv").read_text())])
    assert np.ptp(fit[s.off_spike]) <= 1e-6
    assert trace.read_text().startswith("iteration edge kind")


@pytest.mark.parametrize("argv, code", [
    (["chain"], 1),
    (["chain", "-", "--lambda", "-1"], 1),
    (["chain", "-", "--lambda", "1", "--auto"], 1),
    (["bogus"], 1),
])
def test_usage_errors(argv, code):
    assert run(*argv, stdin="").returncode == code


def test_data_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n0,2\n")
    assert main(["chain", str(bad), "--lambda", "1"]) == 2
    assert main(["image", str(tmp_path / "missing.pgm"), "--lambda", "1"]) == 2
    (tmp_path / "h.pgm").write_bytes(b"P5\n2 2\n0\n")
    assert main(["image", str(tmp_path / "h.pgm"), "--lambda", "1"]) == 2


def test_solve_and_verify(tmp_path):
    g = sparse_graph(np.random.default_rng(5), 12, 0.3)
    gp, fit, state = tmp_path / "g.txt", tmp_path / "f.csv", tmp_path / "s.txt"
    io.write_edge_list(gp, g)
    assert main(["solve", str(gp), "--state", str(state), "-o", str(fit)]) == 0
    assert main(["verify", str(gp), str(fit), "--state", str(state)]) == 0
    assert main(["verify", str(gp), str(fit)]) == 0
    f = io.read_vector(fit)
    f[0] += 1e-3
    fit.write_text("\n".join(map(repr, f.tolist())))
    assert main(["verify", str(gp), str(fit), "--state", str(state)]) == 3


def test_image_auto_matches_discrepancy(tmp_path):
    truth = piecewise_image(16)
    y = np.clip(noisy_image(truth, 0.05, 1), 0, 1)
    src = tmp_path / "in.pgm"
    io.write_pgm(io.ImageBuffer(GridShape(16, 16), y, 65535, "P5"), src)
    table = tmp_path / "fit.csv"
    assert main(["image", str(src), "--auto", "--csv", str(table), "-o", str(tmp_path / "out.pgm")]) == 0
    recs = rows(table.read_text())
    yy = np.array([float(r["y"]) for r in recs])
    f = np.array([float(r["fit"]) for r in recs])
    out = io.read_pgm(tmp_path / "out.pgm")
    assert out.shape == GridShape(16, 16) and out.maxval == 65535
    sigma = estimate_sigma(build_grid4(GridShape(16, 16), yy.reshape(16, 16))).sigma
    assert abs(np.sum((f - yy) ** 2) - sigma ** 2 * yy.size) <= 1e-3 * sigma ** 2 * yy.size


def test_chain_auto_reports_lambda(tmp_path, capsys):
    y = np.repeat([0.0, 1.0], 20) + np.random.default_rng(0).normal(0, 0.1, 40)
    src = tmp_path / "s.csv"
    io.write_csv_fit(src, {"x": np.arange(40.0), "y": y})
    assert main(["chain", str(src), "--auto"]) == 0
    err = capsys.readouterr().err
    assert "lambda=" in err and "sigma=" in err
    g = build_chain(y, np.ones(39))
    assert f"sigma={estimate_sigma(g).sigma!r}" in err
