"""Deterministic data emission: CSV, JSON and gnuplot artifacts.

All floats are written with 17 significant digits, line endings are LF,
JSON key order is stable (insertion order of the report builders), and no
timestamps are embedded, so a rerun with identical config and seed yields
byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_trajectory_csv(path, traj):
    n = traj.system.dof if traj.system.kind == "torus" else 1
    if traj.system.kind == "torus":
        names = ([f"theta{i+1}" for i in range(n)]
                 + [f"I{i+1}" for i in range(n)])
    else:
        names = ["x", "y"]
    header = ["t"] + names + ["H"]
    rows = (
        [traj.times[k]] + list(traj.samples[k]) + [traj.energies[k]]
        for k in range(len(traj.times)))
    return write_csv(path, header, rows)


def write_measure_csv(path, measure):
    dim = measure.points.shape[1]
    header = [f"z{i+1}" for i in range(dim)] + ["weight"]
    rows = ([*measure.points[k], measure.weights[k]]
            for k in range(measure.n_atoms))
    return write_csv(path, header, rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def write_json(path, payload):
    with open(path, "w", newline="") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")
    return path


def write_measure_json(path, measure):
    return write_json(path, {
        "provenance": measure.provenance,
        "atoms": [{"point": p, "weight": w}
                  for p, w in zip(measure.points.tolist(),
                                  measure.weights.tolist())],
    })


def write_gnuplot(path_base, columns, data, title, ylabel, using="1:2"):
    """Emit <base>.dat and a matching <base>.gp script."""
    dat = path_base + ".dat"
    gp = path_base + ".gp"
    with open(dat, "w", newline="") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for row in data:
            fh.write(" ".join(fmt(v) for v in row) + "\n")
    with open(gp, "w", newline="") as fh:
        fh.write(f'set title "{title}"\n')
        fh.write(f'set ylabel "{ylabel}"\n')
        fh.write("set grid\n")
        fh.write(f'plot "{os.path.basename(dat)}" using {using} '
                 f'with lines title "{title}"\n')
    return dat, gp
