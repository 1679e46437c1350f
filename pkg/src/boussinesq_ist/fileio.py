"""CSV/JSON serialization for fields, contour samples, and reports.

Grids go to CSV with a self-describing comment header; values are written
with 17 significant digits so files round-trip losslessly. Reports and
configs are JSON. Nothing here writes timestamps: identical inputs must
produce byte-identical outputs.
"""

from __future__ import annotations

import json
import os

import numpy as np

from boussinesq_ist import __version__
from boussinesq_ist.solitons import SolutionField

FMT = "%.17g"


class FileFormatError(ValueError):
    pass


def _header_lines(command: str, params: dict, columns):
    yield f"# boussinesq-ist {__version__}"
    yield f"# command = {command}"
    for key in sorted(params):
        yield f"# {key} = {params[key]}"
    yield "# columns = " + ",".join(columns)


def write_field(path: str, fld: SolutionField, command: str, params: dict):
    cols = ["x", "t", "u"] + (["v"] if fld.v is not None else [])
    with open(path, "w") as fh:
        for line in _header_lines(command, params, cols):
            fh.write(line + "\n")
        fh.write(",".join(cols) + "\n")
        for it, tv in enumerate(fld.t):
            for ix, xv in enumerate(fld.x):
                row = [FMT % xv, FMT % tv, FMT % fld.u[it, ix]]
                if fld.v is not None:
                    row.append(FMT % fld.v[it, ix])
                fh.write(",".join(row) + "\n")


def read_field(path: str) -> SolutionField:
    rows, cols = _read_csv(path)
    need = {"x", "t", "u"}
    if not need.issubset(cols):
        raise FileFormatError(f"field file must have columns x,t,u[,v], got {cols}")
    x_all = rows[:, cols.index("x")]
    t_all = rows[:, cols.index("t")]
    ts = np.unique(t_all)
    xs = np.unique(x_all)
    nt, nx = ts.size, xs.size
    if nt * nx != rows.shape[0]:
        raise FileFormatError("field file is not a full rectangular grid")
    order = np.lexsort((x_all, t_all))
    u = rows[order, cols.index("u")].reshape(nt, nx)
    v = None
    if "v" in cols:
        v = rows[order, cols.index("v")].reshape(nt, nx)
    return SolutionField(xs, ts, u, v=v, meta={"source": os.path.basename(path)})


def write_contour(path: str, ks, values, command: str, params: dict, param_name="modulus"):
    ks = np.asarray(ks)
    values = np.asarray(values)
    par = np.abs(ks) if param_name == "modulus" else np.angle(ks)
    cols = ["param", "k_re", "k_im", "value_re", "value_im"]
    with open(path, "w") as fh:
        for line in _header_lines(command, dict(params, param=param_name), cols):
            fh.write(line + "\n")
        fh.write(",".join(cols) + "\n")
        for p, k, v in zip(par, ks, values):
            fh.write(
                ",".join(FMT % z for z in (p, k.real, k.imag, v.real, v.imag)) + "\n"
            )


def read_contour(path: str):
    rows, cols = _read_csv(path)
    k = rows[:, cols.index("k_re")] + 1j * rows[:, cols.index("k_im")]
    v = rows[:, cols.index("value_re")] + 1j * rows[:, cols.index("value_im")]
    return k, v


def write_json(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _read_csv(path: str):
    header = None
    data = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            try:
                data.append([float(c) for c in line.split(",")])
            except ValueError as exc:
                raise FileFormatError(f"bad row in {path}: {line!r}") from exc
    if header is None or not data:
        raise FileFormatError(f"{path} has no data rows")
    rows = np.asarray(data, dtype=float)
    if rows.shape[1] != len(header):
        raise FileFormatError(f"{path}: ragged rows")
    if not np.all(np.isfinite(rows)):
        raise FileFormatError(f"{path}: non-finite values")
    return rows, header


def read_initial_csv(path: str):
    """Columns x,u0,v0 or x,u0,u1; returns (x, u0, v0_or_None, u1_or_None)."""
    rows, cols = _read_csv(path)
    if "x" not in cols or "u0" not in cols:
        raise FileFormatError("initial data needs columns x,u0 plus v0 or u1")
    x = rows[:, cols.index("x")]
    u0 = rows[:, cols.index("u0")]
    v0 = rows[:, cols.index("v0")] if "v0" in cols else None
    u1 = rows[:, cols.index("u1")] if "u1" in cols else None
    if v0 is None and u1 is None:
        raise FileFormatError("initial data needs a v0 or a u1 column")
    return x, u0, v0, u1


def write_initial_csv(path: str, x, u0, v0, command: str, params: dict):
    cols = ["x", "u0", "v0"]
    with open(path, "w") as fh:
        for line in _header_lines(command, params, cols):
            fh.write(line + "\n")
        fh.write(",".join(cols) + "\n")
        for row in zip(x, u0, v0):
            fh.write(",".join(FMT % z for z in row) + "\n")
