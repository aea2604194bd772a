"""Curve ingestion and run-artifact persistence.

Two curve layouts are accepted:

long
    header ``curve_id,t,y``; one observation per row; curves may have
    different time grids.
wide
    header ``t,<id1>,<id2>,...``; column 1 is time, every other column one
    curve observed on that shared grid.

All floats are written with ``repr`` so files round-trip exactly and repeated
runs are byte-identical.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import AlignmentError, DataFormatError
from .spline_core import Curve

LONG_HEADER = ("curve_id", "t", "y")


def _float(cell, line, what):
    try:
        x = float(cell)
    except ValueError:
        raise DataFormatError(f"non-numeric {what} {cell!r}", line) from None
    if not math.isfinite(x):
        raise DataFormatError(f"non-finite {what} {cell!r}", line)
    return x


def _read_rows(path):
    with open(path, newline="") as fh:
        rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1)
                if row and any(c.strip() for c in row)]
    if not rows:
        raise DataFormatError(f"{path} is empty")
    return rows


def _detect(header):
    names = tuple(c.strip().lower() for c in header)
    return "long" if names == LONG_HEADER else "wide"


def _make_curve(cid, times, values, line):
    try:
        return Curve(cid, np.array(times), np.array(values))
    except AlignmentError as exc:
        raise DataFormatError(str(exc), line) from None


def _load_long(rows):
    grouped, first_line = {}, {}
    for line, row in rows[1:]:
        if len(row) != 3:
            raise DataFormatError(f"expected 3 cells, found {len(row)}", line)
        cid = row[0].strip()
        if not cid:
            raise DataFormatError("empty curve id", line)
        t = _float(row[1], line, "time")
        y = _float(row[2], line, "value")
        ts, ys = grouped.setdefault(cid, ([], []))
        first_line.setdefault(cid, line)
        if ts and t <= ts[-1]:
            raise DataFormatError(f"times of curve {cid!r} are not strictly increasing", line)
        ts.append(t)
        ys.append(y)
    return [_make_curve(cid, ts, ys, first_line[cid]) for cid, (ts, ys) in grouped.items()]


def _load_wide(rows):
    header_line, header = rows[0]
    ids = [c.strip() for c in header[1:]]
    if not ids:
        raise DataFormatError("wide format needs a time column and at least one curve", header_line)
    if len(set(ids)) != len(ids) or not all(ids):
        raise DataFormatError("curve ids in the header must be unique and non-empty", header_line)
    times, cols = [], [[] for _ in ids]
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise DataFormatError(f"ragged row: expected {len(header)} cells, found {len(row)}",
                                  line)
        t = _float(row[0], line, "time")
        if times and t <= times[-1]:
            raise DataFormatError("times are not strictly increasing", line)
        times.append(t)
        for col, cell in zip(cols, row[1:]):
            col.append(_float(cell, line, "value"))
    return [_make_curve(cid, times, col, header_line) for cid, col in zip(ids, cols)]


def load_curves(path, fmt="auto"):
    """Read curves from a long or wide CSV; ``fmt="auto"`` inspects the header."""
    rows = _read_rows(path)
    if fmt == "auto":
        fmt = _detect(rows[0][1])
    if fmt == "long":
        if _detect(rows[0][1]) != "long":
            raise DataFormatError(f"long format needs the header {','.join(LONG_HEADER)}", 1)
        return _load_long(rows)
    if fmt == "wide":
        return _load_wide(rows)
    raise DataFormatError(f"unknown format {fmt!r}")


def save_curves(curves, path):
    """Write curves in long format."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LONG_HEADER)
        for c in curves:
            for t, y in zip(c.times, c.values):
                w.writerow([c.id, repr(float(t)), repr(float(y))])


def write_grid_csv(path, grid, ids, rows):
    """Wide table: one time column then one column per curve."""
    rows = np.asarray(rows, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *ids])
        for j, t in enumerate(grid):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in rows[:, j])])


def read_grid_csv(path):
    """Inverse of :func:`write_grid_csv`: ``(grid, ids, rows)``."""
    curves = _load_wide(_read_rows(path))
    return curves[0].times, [c.id for c in curves], np.array([c.values for c in curves])


def write_fitted_csv(path, data, fitted):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["curve_id", "t", "y", "fitted"])
        for c, yhat in zip(data, fitted):
            for t, y, f in zip(c.times, c.values, yhat):
                w.writerow([c.id, repr(float(t)), repr(float(y)), repr(float(f))])


def read_fitted_csv(path):
    """``{curve_id: (y, fitted)}`` from a fitted-values table."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            y, f = out.setdefault(row["curve_id"], ([], []))
            y.append(float(row["y"]))
            f.append(float(row["fitted"]))
    return {k: (np.array(y), np.array(f)) for k, (y, f) in out.items()}


def _warp_rows(warp):
    if warp.family == "linear":
        return [("alpha", 0, warp.alpha), ("beta", 0, warp.beta)]
    rows = [("gamma0", 0, warp.gamma0)] if warp.family == "free" else []
    if warp.gamma is not None:
        rows += [("gamma", k, g) for k, g in enumerate(warp.gamma)]
    return rows


def write_params_csv(path, result):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["curve_id", "param", "index", "value"])
        for cid, p in zip(result.curve_ids, result.params):
            for k, v in enumerate(p.theta):
                w.writerow([cid, "theta", k, repr(float(v))])
            for name, k, v in _warp_rows(p.warp):
                w.writerow([cid, name, k, repr(float(v))])
        for k, v in enumerate(result.mu_theta):
            w.writerow(["", "mu_theta", k, repr(float(v))])


def write_metrics(path, result):
    lines = [f"method = {result.method}"]
    lines += [f"{k} = {v!r}" for k, v in result.metrics.items()]
    lines.append(f"converged = {result.converged}")
    lines.append(f"outer_iterations = {len(result.trace)}")
    lines.append("q_trace = " + ",".join(repr(float(q)) for q in result.trace))
    lines += [f"note = {n}" for n in result.notes]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_key_values(path):
    """``key = value`` (or ``key=value``) lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataFormatError(f"expected key=value, found {line!r}", line_no)
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
