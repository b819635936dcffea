"""Readers and writers: PGM images, CSV signals and scatter data, plain
text graphs, solver state and event traces."""

from __future__ import annotations

import csv
import io as _io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from . import errors
from .graph import Graph, GridShape, new_graph

PathOrFile = Union[str, Path, IO]


@dataclass
class ImageBuffer:
    shape: GridShape
    pixels: np.ndarray  # (n1, n2) floats, nominally in [0, 1]
    maxval: int = 255
    magic: str = "P5"


@dataclass
class ScatterSet:
    x1: np.ndarray
    x2: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.y)

    @property
    def coords(self) -> np.ndarray:
        return np.column_stack([self.x1, self.x2])


def _open(src: PathOrFile, mode: str):
    if isinstance(src, (str, Path)):
        return open(src, mode), True
    return src, False


# -- PGM ----------------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _pgm_header(raw: bytes) -> tuple[str, int, int, int, int]:
    pos = 0
    vals = []
    for _ in range(4):
        m = _TOKEN.match(raw, pos)
        if m is None:
            raise errors.MalformedHeader("incomplete PGM header")
        vals.append(m.group(1))
        pos = m.end()
    magic = vals[0].decode("ascii", "replace")
    if magic not in ("P2", "P5"):
        raise errors.MalformedHeader(f"unsupported magic number {magic!r}")
    try:
        width, height, maxval = (int(v) for v in vals[1:])
    except ValueError:
        raise errors.MalformedHeader("non-numeric PGM header field") from None
    if width < 1 or height < 1:
        raise errors.MalformedHeader(f"bad image size {width}x{height}")
    if not 0 < maxval <= 65535:
        raise errors.MalformedHeader(f"maxval must be in 1..65535, got {maxval}")
    return magic, width, height, maxval, pos


def read_pgm(src: PathOrFile) -> ImageBuffer:
    fh, own = _open(src, "rb")
    try:
        raw = fh.read()
    finally:
        if own:
            fh.close()
    if isinstance(raw, str):
        raw = raw.encode("ascii")
    magic, width, height, maxval, pos = _pgm_header(raw)
    count = width * height
    if magic == "P5":
        pos += 1  # exactly one whitespace byte before the raster
        dtype = ">u2" if maxval > 255 else "u1"
        need = count * np.dtype(dtype).itemsize
        if len(raw) - pos < need:
            raise errors.TruncatedData(f"expected {need} raster bytes, found {len(raw) - pos}")
        levels = np.frombuffer(raw, dtype=dtype, count=count, offset=pos).astype(np.int64)
    else:
        tokens = raw[pos:].split()
        if len(tokens) < count:
            raise errors.TruncatedData(f"expected {count} samples, found {len(tokens)}")
        try:
            levels = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError:
            raise errors.ParseError("non-integer sample in P2 raster") from None
    if np.any(levels > maxval) or np.any(levels < 0):
        raise errors.ParseError("sample outside 0..maxval")
    pixels = (levels / maxval).reshape(height, width)
    return ImageBuffer(GridShape(height, width), pixels, maxval, magic)


def quantize(pixels, maxval: int) -> np.ndarray:
    """Round half up to integer levels, clipped to 0..maxval."""
    return np.clip(np.floor(np.asarray(pixels) * maxval + 0.5), 0, maxval).astype(np.int64)


def write_pgm(buf: ImageBuffer, dst: PathOrFile, magic: Optional[str] = None):
    magic = magic or buf.magic
    n1, n2 = buf.shape.n1, buf.shape.n2
    levels = quantize(buf.pixels, buf.maxval).reshape(n1, n2)
    header = f"{magic}\n{n2} {n1}\n{buf.maxval}\n".encode("ascii")
    if magic == "P5":
        body = levels.astype(">u2" if buf.maxval > 255 else "u1").tobytes()
    elif magic == "P2":
        body = "".join(" ".join(map(str, row)) + "\n" for row in levels.tolist()).encode("ascii")
    else:
        raise errors.MalformedHeader(f"cannot write magic number {magic!r}")
    fh, own = _open(dst, "wb")
    try:
        fh.write(header + body)
    finally:
        if own:
            fh.close()


# -- CSV ------------------------------------------------------------------------

def _rows(src: PathOrFile, ncol: int) -> np.ndarray:
    fh, own = _open(src, "r")
    try:
        text = fh.read()
    finally:
        if own:
            fh.close()
    rows = []
    for lineno, rec in enumerate(csv.reader(_io.StringIO(text)), start=1):
        if not rec or all(not f.strip() for f in rec):
            continue
        try:
            vals = [float(f) for f in rec]
        except ValueError:
            if not rows and lineno == 1:
                continue  # header
            raise errors.ParseError(f"line {lineno}: non-numeric field") from None
        if len(vals) < ncol:
            raise errors.ParseError(f"line {lineno}: expected {ncol} columns, got {len(vals)}")
        rows.append(vals[:ncol])
    arr = np.array(rows, dtype=float).reshape(-1, ncol)
    if not np.all(np.isfinite(arr)):
        raise errors.NonFiniteData("CSV contains non-finite values")
    return arr


def read_csv_signal(src: PathOrFile, unique_x: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``x,y`` sorted by x. Repeated x is an error when ``unique_x``."""
    arr = _rows(src, 2)
    order = np.argsort(arr[:, 0], kind="stable")
    x, y = arr[order, 0], arr[order, 1]
    if unique_x and np.any(np.diff(x) == 0):
        dup = x[np.flatnonzero(np.diff(x) == 0)[0]]
        raise errors.DuplicateX(f"x = {float(dup)!r} occurs more than once")
    return x, y


def read_csv_scatter(src: PathOrFile) -> ScatterSet:
    arr = _rows(src, 3)
    return ScatterSet(arr[:, 0], arr[:, 1], arr[:, 2])


def write_csv_fit(dst: PathOrFile, columns: dict[str, Sequence]):
    names = list(columns)
    cols = [np.asarray(columns[k]).tolist() for k in names]
    if len({len(c) for c in cols}) > 1:
        raise errors.LengthMismatch("columns differ in length")
    fh, own = _open(dst, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    finally:
        if own:
            fh.close()


def write_scatter(dst: PathOrFile, data: ScatterSet):
    write_csv_fit(dst, {"x1": data.x1, "x2": data.x2, "y": data.y})


# -- graphs and solver state ------------------------------------------------------

def _numbers(src: PathOrFile) -> list[str]:
    fh, own = _open(src, "r")
    try:
        text = fh.read()
    finally:
        if own:
            fh.close()
    return [t for line in text.splitlines() for t in line.split("#", 1)[0].split()]


def read_edge_list(src: PathOrFile) -> Graph:
    """``n m`` on the first line, then m lines ``tail head lambda``, then n
    lines ``weight value``. Vertices are 0-based."""
    tok = _numbers(src)
    try:
        n, m = int(tok[0]), int(tok[1])
    except (IndexError, ValueError):
        raise errors.MalformedHeader("edge list must start with 'n m'") from None
    need = 2 + 3 * m + 2 * n
    if len(tok) < need:
        raise errors.TruncatedData(f"expected {need} fields, found {len(tok)}")
    try:
        edges = [(int(tok[2 + 3 * i]), int(tok[3 + 3 * i]), float(tok[4 + 3 * i])) for i in range(m)]
        rest = [float(t) for t in tok[2 + 3 * m:need]]
    except ValueError:
        raise errors.ParseError("malformed number in edge list") from None
    return new_graph(n, edges, rest[0::2], rest[1::2])


def write_edge_list(dst: PathOrFile, g: Graph):
    fh, own = _open(dst, "w")
    try:
        fh.write(f"{g.n_vertices} {g.n_edges}\n")
        for a, b, lam in g.edges:
            fh.write(f"{a} {b} {lam!r}\n")
        for w, y in zip(g.weights.tolist(), g.data.tolist()):
            fh.write(f"{w!r} {y!r}\n")
    finally:
        if own:
            fh.close()


def read_vector(src: PathOrFile) -> np.ndarray:
    """One number per line; a CSV with a header takes the last column."""
    fh, own = _open(src, "r")
    try:
        lines = [ln.strip() for ln in fh.read().splitlines() if ln.strip()]
    finally:
        if own:
            fh.close()
    vals = []
    for i, ln in enumerate(lines):
        field = ln.split(",")[-1]
        try:
            vals.append(float(field))
        except ValueError:
            if i == 0:
                continue
            raise errors.ParseError(f"line {i + 1}: not a number") from None
    return np.array(vals)


def write_state(dst: PathOrFile, c, active: Iterable[int]):
    """One line per edge: coefficient and 0/1 active flag."""
    act = set(int(e) for e in active)
    fh, own = _open(dst, "w")
    try:
        for e, ce in enumerate(np.asarray(c, dtype=float).tolist()):
            fh.write(f"{ce!r} {int(e in act)}\n")
    finally:
        if own:
            fh.close()


def read_state(src: PathOrFile) -> tuple[np.ndarray, list[int]]:
    tok = _numbers(src)
    if len(tok) % 2:
        raise errors.TruncatedData("state file must hold pairs 'c active'")
    try:
        c = np.array([float(t) for t in tok[0::2]])
        flags = [int(t) for t in tok[1::2]]
    except ValueError:
        raise errors.ParseError("malformed state file") from None
    return c, [e for e, a in enumerate(flags) if a]


def write_trace(dst: PathOrFile, records):
    fh, own = _open(dst, "w")
    try:
        fh.write("iteration edge kind df_k df_l dc q_working\n")
        for r in records:
            fh.write(r.line() + "\n")
    finally:
        if own:
            fh.close()


__all__ = [
    "ImageBuffer", "ScatterSet", "read_pgm", "write_pgm", "quantize", "read_csv_signal",
    "read_csv_scatter", "write_csv_fit", "write_scatter", "read_edge_list", "write_edge_list",
    "read_vector", "write_state", "read_state", "write_trace",
]
