"""CSV and JSON output.

Numbers are written as ``%.16e`` (17 significant digits), enough to
round-trip every double, so identical inputs give byte-identical files.
Each CSV ``name.csv`` may carry a sidecar ``name.json``.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .schrodinger import wronskian_drift

__all__ = [
    "BASIS_COLUMNS", "ACTION_COLUMNS", "TRAJECTORY_COLUMNS",
    "format_number", "write_csv", "read_csv", "write_json", "to_jsonable",
    "write_basis", "write_action", "write_trajectory",
]

BASIS_COLUMNS = ("x", "theta1", "theta2", "dtheta1", "dtheta2")
ACTION_COLUMNS = ("x", "S0", "dS0", "A", "VB", "residual")
TRAJECTORY_COLUMNS = ("x", "t", "v_floyd", "v_bohm", "v_plus", "v_minus")


def format_number(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.16e}"


def write_csv(path, columns, arrays):
    path = Path(path)
    data = np.column_stack([np.asarray(a, dtype=float) for a in arrays])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in data:
            w.writerow([format_number(v) for v in row])
    return path


def read_csv(path):
    """Header tuple and a dict of column arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head = tuple(rows[0])
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return head, {h: data[:, i] for i, h in enumerate(head)}


def to_jsonable(obj):
    """Recursively convert numpy values, complex numbers and tuples."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def _sidecar(path):
    return Path(path).with_suffix(".json")


def write_basis(path, b, meta=None):
    """``x,theta1,theta2,dtheta1,dtheta2`` and a sidecar with energy and x0."""
    write_csv(path, BASIS_COLUMNS, (b.x, b.theta1, b.theta2, b.dtheta1, b.dtheta2))
    side = {"E": b.energy, "x0": b.x0, "wronskian": b.wronskian,
            "grid": {"x_min": b.grid.x_min, "x_max": b.grid.x_max, "n": b.grid.n}}
    side.update(meta or {})
    write_json(_sidecar(path), side)


def write_action(path, f, meta=None):
    """``x,S0,dS0,A,VB,residual`` and a sidecar with the invariants."""
    write_csv(path, ACTION_COLUMNS, (f.x, f.S0, f.dS0, f.A, f.VB, f.residual))
    prod = f.product
    inner = f.residual[2:-2]
    side = {
        "E": f.energy, "microstate": f.microstate.as_dict(),
        "constants": {"hbar": f.constants.hbar, "mass": f.constants.mass},
        "W": f.basis.wronskian, "wronskian_drift": wronskian_drift(f.basis),
        "wronskian_drift_relative": wronskian_drift(f.basis, True),
        "A2_dS0": float(np.mean(prod)),
        "A2_dS0_relative_spread": float(np.ptp(prod) / abs(np.mean(prod))),
        "integral_mismatch": f.integral_mismatch,
        "max_interior_residual": float(np.nanmax(np.abs(inner))) if inner.size else None,
    }
    side.update(meta or {})
    write_json(_sidecar(path), side)


def write_trajectory(path, tr, meta=None):
    """``x,t,v_floyd,v_bohm,v_plus,v_minus`` and a sidecar with the metrics."""
    write_csv(path, TRAJECTORY_COLUMNS,
              (tr.x, tr.t, tr.v_floyd, tr.v_bohm, tr.v_plus, tr.v_minus))
    side = tr.metrics()
    side.update(meta or {})
    write_json(_sidecar(path), side)
