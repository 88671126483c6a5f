"""Power-law fit of thresholds against coordination number.

Fits ``p_c = A * z**(-gamma)`` as a straight line ``ln p_c = ln A - gamma ln z``
by closed-form (optionally weighted) least squares.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThresholdPoint:
    z: int
    p_c: float
    u: float = 0.0
    label: str = ""

    def __post_init__(self):
        if int(self.z) != self.z or self.z < 1:
            raise ValueError(f"z must be a positive integer, got {self.z!r}")
        if not 0.0 < self.p_c < 1.0:
            raise ValueError(f"p_c must lie in (0, 1), got {self.p_c!r}")
        if not self.u >= 0.0:
            raise ValueError(f"u must be nonnegative, got {self.u!r}")


@dataclass(frozen=True, eq=False)
class PowerLawFit:
    gamma: float
    amplitude: float
    gamma_stderr: float
    residuals: np.ndarray  # ln p_c - fitted ln p_c, input order
    n_points: int
    weighting: str

    def predict(self, z):
        return self.amplitude * np.asarray(z, dtype=float) ** (-self.gamma)

    def to_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "gamma_stderr": float(self.gamma_stderr),
            "amplitude": float(self.amplitude),
            "n_points": int(self.n_points),
            "weighting": self.weighting,
        }


def fit_power_law(points, weighting: str = "uniform") -> PowerLawFit:
    """Least-squares fit of ln p_c on ln z.

    Parameters
    ----------
    points : sequence of ThresholdPoint
    weighting : {"uniform", "inverse-variance"}
        Inverse-variance weights use the log-space error ``u / p_c``, so
        every point then needs ``u > 0``.

    Raises
    ------
    ValueError
        Fewer than three points, fewer than two distinct z, or a zero
        uncertainty under inverse-variance weighting.
    """
    pts = list(points)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    z = np.array([pt.z for pt in pts], dtype=float)
    if np.unique(z).size < 2:
        raise ValueError("need at least two distinct z values")
    x = np.log(z)
    y = np.log(np.array([pt.p_c for pt in pts], dtype=float))

    if weighting == "uniform":
        w = np.ones_like(x)
    elif weighting == "inverse-variance":
        sig = np.array([pt.u / pt.p_c for pt in pts], dtype=float)
        if np.any(sig <= 0):
            raise ValueError("inverse-variance weighting needs u > 0 for every point")
        w = 1.0 / sig**2
    else:
        raise ValueError(f"unknown weighting {weighting!r}")

    W = w.sum()
    mx = (w * x).sum() / W
    my = (w * y).sum() / W
    sxx = (w * (x - mx) ** 2).sum()
    slope = (w * (x - mx) * (y - my)).sum() / sxx
    intercept = my - slope * mx
    resid = y - (intercept + slope * x)

    dof = len(pts) - 2
    if dof > 0:
        s2 = (w * resid**2).sum() / dof
        stderr = math.sqrt(s2 / sxx)
    else:
        stderr = float("nan")
    return PowerLawFit(
        gamma=float(-slope),
        amplitude=float(math.exp(intercept)),
        gamma_stderr=float(stderr),
        residuals=resid,
        n_points=len(pts),
        weighting=weighting,
    )


class InputFormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def read_points_csv(path) -> list:
    """Read ``label,z,p_c,u`` rows (header required)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputFormatError("empty file", line=1)
        header = [h.strip() for h in header]
        if header != ["label", "z", "p_c", "u"]:
            raise InputFormatError(f"expected header label,z,p_c,u, got {','.join(header)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise InputFormatError(f"expected 4 fields, got {len(row)}", line=lineno)
            try:
                zf = float(row[1])
                if zf != int(zf):
                    raise ValueError(f"z must be an integer, got {row[1]!r}")
                out.append(ThresholdPoint(int(zf), float(row[2]), float(row[3] or 0.0), row[0].strip()))
            except ValueError as exc:
                raise InputFormatError(str(exc), line=lineno) from None
    return out
