"""File formats for curves, thresholds, tables, fits and run manifests.

Floats are written with ``repr``: the shortest string that round-trips to
the same double, so no precision is lost.
"""

from __future__ import annotations

import csv
import json
import platform
import sys

import numba
import numpy as np

from . import __version__

MANIFEST_SCHEMA_VERSION = 1

CURVE_HEADER = ["neighborhood", "L", "p", "N", "spanning_count", "P"]
TABLE_HEADER = ["neighborhood", "z", "p_c", "u", "bracket_lo", "bracket_hi", "status"]


def fmt(x) -> str:
    return repr(float(x))


def curve_filename(curve) -> str:
    return f"curve_{curve.spec_name}_L{curve.L}.csv"


def write_curve_csv(curve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        P = curve.P
        for k, p in enumerate(curve.p_grid):
            w.writerow([curve.spec_name, curve.L, fmt(p), curve.N, int(curve.spanning_counts[k]), fmt(P[k])])


def read_curve_csv(path):
    """Inverse of :func:`write_curve_csv`."""
    from .experiment import PercolationCurve

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    return PercolationCurve(
        spec_name=rows[0]["neighborhood"],
        L=int(rows[0]["L"]),
        p_grid=np.array([float(r["p"]) for r in rows]),
        spanning_counts=np.array([int(r["spanning_count"]) for r in rows], dtype=np.int64),
        N=int(rows[0]["N"]),
    )


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table(rows, csv_path, json_path) -> None:
    """`rows` are dicts keyed by TABLE_HEADER; missing p_c/u stay blank."""
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for r in rows:
            w.writerow([
                r["neighborhood"], r["z"],
                *("" if r.get(k) is None else fmt(r[k]) for k in ("p_c", "u", "bracket_lo", "bracket_hi")),
                r["status"],
            ])
    write_json({"rows": rows}, json_path)


def write_fit_curve_csv(points, fit, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "z", "p_c", "fitted_p_c"])
        for pt in points:
            w.writerow([pt.label, pt.z, fmt(pt.p_c), fmt(fit.predict(pt.z))])


def manifest(command: str, config: dict, outputs, wall_time: float, complete: bool = True, **extra) -> dict:
    return {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "tool": "cubicperc",
        "command": command,
        "config": config,
        "complete": bool(complete),
        "outputs": sorted(outputs),
        "wall_time_s": round(wall_time, 3),
        "versions": {
            "cubicperc": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "numba": numba.__version__,
            "platform": platform.platform(),
        },
        **extra,
    }
