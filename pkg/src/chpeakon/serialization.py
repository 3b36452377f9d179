"""CSV, JSON and binary writers for trajectories, fields and monitors."""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .pde_solver import MONITOR_COLUMNS, MonitorSeries
from .peakon_dynamics import Trajectory, h1_norm_peakon
from .state import GridField

FIELD_MAGIC = b"PKLB"
FIELD_VERSION = 1
_HEADER = struct.Struct("<4sIIdd")


def fmt(v: float) -> str:
    return "%.17g" % v


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def trajectory_rows(traj: Trajectory, with_h1: bool = False):
    n = traj.states[0].n
    header = ["t"] + [f"p_{i + 1}" for i in range(n)] + [f"q_{i + 1}" for i in range(n)]
    if with_h1:
        header.append("h1_norm")
    rows = []
    for st in traj.states:
        row = [st.t, *st.p, *st.q]
        if with_h1:
            row.append(h1_norm_peakon(st))
        rows.append(row)
    return header, rows


def write_trajectory(path, traj: Trajectory, with_h1: bool = False) -> None:
    write_csv(path, *trajectory_rows(traj, with_h1))


def write_events(path, traj: Trajectory) -> None:
    write_json(path, {"status": traj.status.value, "events": traj.events})


def write_field_csv(path, field: GridField) -> None:
    write_csv(path, ["x", "u"], zip(field.x, field.values))


def write_field_binary(path, field: GridField) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FIELD_MAGIC, FIELD_VERSION, field.n, field.L, field.t))
        fh.write(np.asarray(field.values, dtype="<f8").tobytes())


def read_field_binary(path) -> GridField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for a field header")
    magic, version, n, L, t = _HEADER.unpack_from(raw)
    if magic != FIELD_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != FIELD_VERSION:
        raise ValueError(f"unsupported field format version {version}")
    body = raw[_HEADER.size:]
    if len(body) != 8 * n:
        raise ValueError(f"expected {n} values, found {len(body) / 8:g}")
    return GridField(L, n, np.frombuffer(body, dtype="<f8").astype(float), t)


def write_monitors(path, monitors: MonitorSeries) -> None:
    write_csv(path, MONITOR_COLUMNS, monitors.rows)


def write_gnuplot(path, data_file: str, title: str, xcol: int, ycols: dict[str, int],
                  xlabel: str = "t", ylabel: str = "") -> None:
    """Plain gnuplot script plotting columns of a comma-separated data file."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    parts = [f"'{data_file}' using {xcol}:{col} with lines title '{name}'" for name, col in ycols.items()]
    lines.append("plot " + ", \\\n     ".join(parts))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n")
