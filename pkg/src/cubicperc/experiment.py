"""Monte Carlo sweeps of the spanning probability and curve-crossing thresholds.

Every realization draws one uniform field and thresholds it at all grid
points, so each field contributes a step function in p.  The per-field
result is the index of the first spanning grid point; counts along the grid
are the cumulative histogram of those indices and are therefore
nondecreasing.  Work is keyed by ``(L, realization_index)`` and reduced by
integer summation, so the totals do not depend on how realizations are
distributed over workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .labeling import first_spanning_index
from .lattice import LatticeGeometry, generate_field
from .neighborhood import NeighborhoodSpec, by_name

log = logging.getLogger(__name__)

# both curves must sit strictly inside this band for a sign change to count
ADMISSIBLE_BAND = (0.02, 0.98)

_GRID_DECIMALS = 12


def make_grid(p_min: float, p_max: float, delta_p: float) -> np.ndarray:
    """Arithmetic grid ``p_min + k * delta_p`` up to `p_max` inclusive.

    Points are rounded to 12 decimals so that grids built from the same
    numbers compare equal and print cleanly.
    """
    if not (0.0 <= p_min < p_max <= 1.0):
        raise ValueError(f"need 0 <= p_min < p_max <= 1, got ({p_min}, {p_max})")
    if not delta_p > 0:
        raise ValueError(f"delta_p must be positive, got {delta_p}")
    k = int(math.floor((p_max - p_min) / delta_p + 1e-9))
    grid = np.round(p_min + delta_p * np.arange(k + 1), _GRID_DECIMALS)
    if grid.size < 2:
        raise ValueError("grid needs at least two points")
    return np.clip(grid, 0.0, 1.0)


@dataclass(frozen=True)
class SweepPlan:
    spec: NeighborhoodSpec
    sizes: tuple
    p_min: float
    p_max: float
    delta_p: float
    realizations: int
    master_seed: int

    def __post_init__(self):
        sizes = tuple(int(L) for L in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes:
            raise ValueError("at least one lattice size is required")
        if any(L < 2 for L in sizes):
            raise ValueError(f"lattice sizes must be >= 2, got {sizes}")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"sizes must be strictly increasing, got {sizes}")
        if int(self.realizations) < 1:
            raise ValueError("realizations must be >= 1")
        make_grid(self.p_min, self.p_max, self.delta_p)

    @property
    def grid(self) -> np.ndarray:
        return make_grid(self.p_min, self.p_max, self.delta_p)

    def describe(self) -> dict:
        return {
            "neighborhood": self.spec.name,
            "sizes": list(self.sizes),
            "p_min": self.p_min,
            "p_max": self.p_max,
            "delta_p": self.delta_p,
            "N": int(self.realizations),
            "master_seed": int(self.master_seed),
        }


@dataclass(frozen=True, eq=False)
class PercolationCurve:
    """Spanning counts over a p-grid for one (neighborhood, L).

    `N` is the number of realizations actually completed; `complete` is
    False when a sweep was aborted part-way.
    """

    spec_name: str
    L: int
    p_grid: np.ndarray
    spanning_counts: np.ndarray
    N: int
    complete: bool = True

    @property
    def P(self) -> np.ndarray:
        if self.N == 0:
            return np.full(self.p_grid.shape, np.nan)
        return self.spanning_counts / self.N


@dataclass(eq=False)
class ThresholdEstimate:
    spec_name: str
    sizes: tuple
    bracket: tuple
    delta_p: float
    N: int = 0
    master_seed: int | None = None
    grid: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    curves: list = field(default_factory=list, repr=False)

    @property
    def p_c(self) -> float:
        return 0.5 * (self.bracket[0] + self.bracket[1])

    @property
    def u(self) -> float:
        """Type-B uncertainty: bracket width over sqrt(3)."""
        return (self.bracket[1] - self.bracket[0]) / math.sqrt(3.0)

    def to_dict(self) -> dict:
        return {
            "neighborhood": self.spec_name,
            "L_pair": list(self.sizes),
            "bracket": [float(self.bracket[0]), float(self.bracket[1])],
            "p_c": float(self.p_c),
            "u": float(self.u),
            "delta_p": float(self.delta_p),
            "N": int(self.N),
            "master_seed": self.master_seed,
            "grid": self.grid,
            "history": self.history,
        }


class CrossingError(Exception):
    """Base for failures to locate a unique curve crossing."""

    def __init__(self, message, window=None, brackets=(), history=None):
        super().__init__(message)
        self.window = window
        self.brackets = list(brackets)
        self.history = list(history or [])


class NoCrossingError(CrossingError):
    pass


class AmbiguousCrossingError(CrossingError):
    pass


def _count_chunk(spec_name, L, grid, master_seed, start, stop):
    """Histogram of first-spanning indices for realizations [start, stop)."""
    spec = by_name(spec_name)
    geom = LatticeGeometry(L)
    hist = np.zeros(len(grid) + 1, dtype=np.int64)
    for r in range(start, stop):
        fld = generate_field(geom, master_seed, r)
        hist[first_spanning_index(fld.values, L, spec, grid)] += 1
    return hist


def _chunks(n, pieces):
    pieces = max(1, min(n, pieces))
    edges = np.linspace(0, n, pieces + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_sweep(plan: SweepPlan, workers: int = 1, progress=None) -> list:
    """Estimate P(p) on the plan's grid for every lattice size.

    Parameters
    ----------
    plan : SweepPlan
    workers : int
        Number of worker processes; 1 runs in-process.  Results are
        identical for every value.
    progress : callable, optional
        Called as ``progress(L, done, total)`` after each finished chunk.

    Returns
    -------
    list of PercolationCurve
        One per size, in plan order.  If the run is interrupted (MemoryError
        or KeyboardInterrupt) the curves finished so far are returned, the
        current one marked ``complete=False``.
    """
    grid = plan.grid
    N = int(plan.realizations)
    curves = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for L in plan.sizes:
            hist = np.zeros(len(grid) + 1, dtype=np.int64)
            done = 0
            complete = True
            chunks = _chunks(N, 4 * workers if pool else max(1, N // 500))
            try:
                if pool is None:
                    for a, b in chunks:
                        hist += _count_chunk(plan.spec.name, L, grid, plan.master_seed, a, b)
                        done += b - a
                        if progress:
                            progress(L, done, N)
                else:
                    futures = [
                        (b - a, pool.submit(_count_chunk, plan.spec.name, L, grid, plan.master_seed, a, b))
                        for a, b in chunks
                    ]
                    for n_chunk, fut in futures:
                        hist += fut.result()
                        done += n_chunk
                        if progress:
                            progress(L, done, N)
            except (MemoryError, KeyboardInterrupt) as exc:
                log.error("sweep aborted at L=%d after %d/%d realizations: %r", L, done, N, exc)
                complete = False
            counts = np.cumsum(hist[:-1])
            assert np.all(np.diff(counts) >= 0)
            curves.append(PercolationCurve(plan.spec.name, L, grid, counts, done, complete))
            if not complete:
                break
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return curves


def find_crossing(curve_small: PercolationCurve, curve_large: PercolationCurve,
                  band=ADMISSIBLE_BAND) -> ThresholdEstimate:
    """Locate the grid cell where two spanning curves cross.

    Only the stretch of grid where both curves lie strictly inside `band`
    is searched.  Grid points where the difference is exactly zero are
    skipped, so a bracket may span more than one cell.

    Raises
    ------
    NoCrossingError
        The difference does not change sign inside the admissible stretch.
    AmbiguousCrossingError
        It changes sign more than once; ``.brackets`` lists every one.
    """
    p = np.asarray(curve_small.p_grid, dtype=float)
    if not np.array_equal(p, np.asarray(curve_large.p_grid, dtype=float)):
        raise ValueError("curves must share the same p-grid")
    if curve_small.L == curve_large.L:
        raise ValueError("curves must come from distinct lattice sizes")
    P1 = np.asarray(curve_small.P, dtype=float)
    P2 = np.asarray(curve_large.P, dtype=float)
    lo, hi = band
    ok = (P1 > lo) & (P1 < hi) & (P2 > lo) & (P2 < hi)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise NoCrossingError(f"no grid point has both curves inside {band}", window=None)
    a, b = int(idx[0]), int(idx[-1])
    window = (float(p[a]), float(p[b]))

    D = P1[a:b + 1] - P2[a:b + 1]
    nz = np.flatnonzero(D != 0) + a
    brackets = []
    for i, j in zip(nz[:-1], nz[1:]):
        if np.sign(P1[i] - P2[i]) != np.sign(P1[j] - P2[j]):
            brackets.append((float(p[i]), float(p[j])))
    if not brackets:
        raise NoCrossingError(f"curves do not cross inside window {window}", window=window)
    if len(brackets) > 1:
        raise AmbiguousCrossingError(
            f"{len(brackets)} sign changes inside window {window}: {brackets}",
            window=window, brackets=brackets,
        )
    step = float(np.min(np.diff(p))) if p.size > 1 else 0.0
    return ThresholdEstimate(
        spec_name=curve_small.spec_name,
        sizes=(int(curve_small.L), int(curve_large.L)),
        bracket=brackets[0],
        delta_p=step,
        N=int(min(curve_small.N, curve_large.N)),
        grid={"p_min": float(p[0]), "p_max": float(p[-1]), "delta_p": step},
    )


def _transition_window(curves, grid, band=ADMISSIBLE_BAND):
    """Coarse-grid stretch from where every curve is still flat-low to where
    every curve is already flat-high."""
    P = np.vstack([c.P for c in curves])
    low = np.flatnonzero(P.max(axis=0) <= band[0])
    high = np.flatnonzero(P.min(axis=0) >= band[1])
    w_lo = float(grid[low[-1]]) if low.size else 0.0
    w_hi = float(grid[high[0]]) if high.size else 1.0
    return w_lo, w_hi


def _aligned_window(w_lo, w_hi, delta_p):
    k_lo = math.floor(w_lo / delta_p + 1e-9)
    k_hi = math.ceil(w_hi / delta_p - 1e-9)
    p_lo = max(0.0, round(k_lo * delta_p, _GRID_DECIMALS))
    p_hi = min(1.0, round(k_hi * delta_p, _GRID_DECIMALS))
    if p_hi - p_lo < delta_p:
        p_hi = min(1.0, p_lo + 2 * delta_p)
        p_lo = max(0.0, p_hi - 2 * delta_p)
    return p_lo, p_hi


def estimate_threshold(spec: NeighborhoodSpec, sizes=(32, 64), delta_p=2e-3, N=10_000,
                       master_seed=0, search_window=None, coarse_N=None,
                       workers=1, progress=None) -> ThresholdEstimate:
    """Threshold from the crossing of the two largest sizes' curves.

    Without `search_window`, a coarse pass (step ``10 * delta_p`` over
    [0, 1], ``coarse_N`` realizations, default ``N // 10``) picks the
    window: one coarse step either side of the coarse crossing, or, if the
    coarse curves give no clean crossing, the stretch between where all
    curves are below and above the admissible band.
    """
    sizes = tuple(sorted(int(L) for L in sizes))
    if len(sizes) < 2:
        raise ValueError("need at least two lattice sizes")
    history = []

    if search_window is None:
        coarse_dp = 10 * delta_p
        cN = int(coarse_N) if coarse_N else max(N // 10, 1)
        coarse_plan = SweepPlan(spec, sizes, 0.0, 1.0, coarse_dp, cN, master_seed)
        coarse = run_sweep(coarse_plan, workers=workers, progress=progress)
        step = {"stage": "coarse", **coarse_plan.describe()}
        try:
            est = find_crossing(coarse[-2], coarse[-1])
            step["bracket"] = list(est.bracket)
            window = (est.bracket[0] - coarse_dp, est.bracket[1] + coarse_dp)
        except CrossingError as exc:
            step["error"] = str(exc)
            window = _transition_window(coarse[-2:], coarse_plan.grid)
        step["window"] = [float(window[0]), float(window[1])]
        history.append(step)
    else:
        window = tuple(float(w) for w in search_window)
        if not 0.0 <= window[0] < window[1] <= 1.0:
            raise ValueError(f"search_window must lie inside [0, 1], got {window}")

    p_lo, p_hi = _aligned_window(window[0], window[1], delta_p)
    plan = SweepPlan(spec, sizes, p_lo, p_hi, delta_p, N, master_seed)
    curves = run_sweep(plan, workers=workers, progress=progress)
    step = {"stage": "fine", **plan.describe()}
    history.append(step)
    if any(not c.complete for c in curves):
        raise CrossingError("sweep aborted before completion", history=history)
    try:
        est = find_crossing(curves[-2], curves[-1])
    except CrossingError as exc:
        step["error"] = str(exc)
        exc.history = history
        raise
    step["bracket"] = list(est.bracket)
    est.delta_p = float(delta_p)
    est.N = int(N)
    est.master_seed = int(master_seed)
    est.grid = {"p_min": p_lo, "p_max": p_hi, "delta_p": float(delta_p)}
    est.history = history
    est.curves = curves
    return est
