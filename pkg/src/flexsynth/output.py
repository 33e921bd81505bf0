"""
CSV time histories and their comparison.

Every file has one header row; the first column is ``time_s`` and the
others follow ``<quantity>_<frame>_<axis>``.  Node columns are prefixed by
the node label (or ``n<index>``).  Numbers are written with Python's
shortest round-trip ``repr``, so identical runs give identical bytes.  A
run that stops early ends the file with a ``# DIVERGED ...`` trailer line.

Units: mm, s, rad, Mg (frame origin and node positions in mm, velocities
in mm/s, accelerations in mm/s^2, angular rates in rad/s and rad/s^2).
"""
from __future__ import annotations

import csv
import fnmatch
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1
TRAILER = "# DIVERGED"

FRAME_COLUMNS = (["time_s"]
                 + [f"origin_global_{i}" for i in (1, 2, 3)]
                 + [f"rot_global_{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
                 + [f"omega_body_{i}" for i in (1, 2, 3)]
                 + [f"alpha_body_{i}" for i in (1, 2, 3)])

NODE_QUANTITIES = ("pos", "disp", "vel", "acc", "accrbm")


def node_name(model, node):
    for label, idx in getattr(model, "node_labels", {}).items():
        if idx == node:
            return label
    return f"n{node}"


def node_columns(names):
    return ["time_s"] + [f"{name}_{q}_global_{i}" for name in names
                         for q in NODE_QUANTITIES for i in (1, 2, 3)]


def modal_columns(n_modes):
    return (["time_s"] + [f"q_modal_{k}" for k in range(n_modes)]
            + [f"qdot_modal_{k}" for k in range(n_modes)])


def frame_table(trajectory):
    n = len(trajectory)
    return np.column_stack([trajectory.time, trajectory.origin,
                            trajectory.rotation.reshape(n, 9),
                            trajectory.omega, trajectory.alpha])


def node_table(time, kin):
    n = len(time)
    parts = [time[:, None]]
    for k in range(len(kin.nodes)):
        for arr in (kin.pos, kin.disp, kin.vel, kin.acc, kin.acc_rbm):
            parts.append(arr[:, k, :].reshape(n, 3))
    return np.hstack(parts)


def modal_table(trajectory):
    return np.column_stack([trajectory.time, trajectory.q, trajectory.q_dot])


def write_csv(path, columns, rows, trailer=None):
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(columns):
        raise ValueError(f"{len(columns)} columns but rows of shape {rows.shape}")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
        if trailer:
            fh.write(f"{TRAILER} {trailer}\n")


@dataclass
class Table:
    columns: list
    data: np.ndarray
    trailer: str | None = None

    def column(self, name):
        return self.data[:, self.columns.index(name)]


def read_csv(path):
    """Parse a CSV written by ``write_csv``; a trailer line is kept aside."""
    rows, trailer = [], None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        for rec in reader:
            if not rec:
                continue
            if rec[0].startswith("#"):
                trailer = ",".join(rec)
                continue
            if len(rec) != len(header):
                raise ConfigError(f"{path}: row with {len(rec)} fields, header has {len(header)}")
            rows.append([float(v) for v in rec])
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return Table(header, data, trailer)


@dataclass
class ColumnReport:
    column: str
    max_abs_diff: float
    rel_rms_diff: float
    passed: bool


def compare_tables(a, b, columns=None, max_rel_rms=0.01, max_abs=None, window=None):
    """Column-wise differences of two tables on the same time grid.

    ``columns`` holds names or shell-style patterns (default: every column
    but time).  The relative RMS difference divides by the RMS of ``b``;
    columns where ``b`` is identically zero fall back to the absolute RMS.
    """
    if a.columns != b.columns:
        only_a = [c for c in a.columns if c not in b.columns]
        only_b = [c for c in b.columns if c not in a.columns]
        detail = f"only in first: {only_a}; only in second: {only_b}"
        if not only_a and not only_b:
            detail = "same columns in a different order"
        raise ConfigError(f"column schemas differ ({detail})")
    if a.data.shape[0] != b.data.shape[0]:
        raise ConfigError(f"row counts differ: {a.data.shape[0]} vs {b.data.shape[0]}")
    ta, tb = a.column("time_s"), b.column("time_s")
    if not np.allclose(ta, tb, rtol=0, atol=1e-9 * max(1.0, np.abs(tb).max(initial=0.0))):
        raise ConfigError("time grids differ")
    mask = np.ones(len(ta), dtype=bool)
    if window is not None:
        mask = (ta >= window[0]) & (ta <= window[1])
    names = [c for c in a.columns if c != "time_s"]
    if columns:
        picked = [c for c in names if any(fnmatch.fnmatchcase(c, p) for p in columns)]
        missing = [p for p in columns if not any(fnmatch.fnmatchcase(c, p) for c in names)]
        if missing:
            raise ConfigError(f"no column matches {missing}")
        names = picked
    reports = []
    for name in names:
        x, y = a.column(name)[mask], b.column(name)[mask]
        diff = x - y
        max_abs_diff = float(np.max(np.abs(diff), initial=0.0))
        rms_d = float(np.sqrt(np.mean(diff ** 2))) if diff.size else 0.0
        rms_b = float(np.sqrt(np.mean(y ** 2))) if y.size else 0.0
        rel = rms_d / rms_b if rms_b > 0 else rms_d
        ok = rel <= max_rel_rms and (max_abs is None or max_abs_diff <= max_abs)
        reports.append(ColumnReport(name, max_abs_diff, rel, bool(ok)))
    return reports


def report_json(reports, thresholds):
    return json.dumps({
        "schema_version": SCHEMA_VERSION,
        "thresholds": thresholds,
        "passed": all(r.passed for r in reports),
        "failed_columns": [r.column for r in reports if not r.passed],
        "columns": [asdict(r) for r in reports],
    }, indent=2)


def report_table(reports):
    width = max([len("column")] + [len(r.column) for r in reports])
    lines = [f"{'column':<{width}}  {'max_abs_diff':>13}  {'rel_rms_diff':>13}  result"]
    for r in reports:
        lines.append(f"{r.column:<{width}}  {r.max_abs_diff:13.6e}  {r.rel_rms_diff:13.6e}  "
                     f"{'pass' if r.passed else 'FAIL'}")
    return "\n".join(lines)


def ensure_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
