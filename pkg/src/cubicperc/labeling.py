"""Hoshen-Kopelman cluster labeling with face-to-face spanning detection.

Clusters are tracked by a union-find forest (union by size, path halving)
over flat site indices.  A configuration spans when one cluster touches
both ``z = 0`` and ``z = L - 1``.  The spanning-only kernel adds two virtual
nodes glued to those faces and stops as soon as they share a root.
Boundaries are free: offsets leaving ``[0, L)^3`` are ignored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numba
import numpy as np

from .lattice import Configuration, LatticeGeometry, OccupancyField
from .neighborhood import NeighborhoodSpec

EMPTY = 0


@numba.njit(cache=True, inline="always")
def _find(parent, i):
    # path halving
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@numba.njit(cache=True, inline="always")
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return ra


@numba.njit(cache=True, inline="always")
def _add_site(parent, size, L, x, y, z, i, offsets, deltas):
    """Occupy site `i` and merge it with its occupied stencil neighbours."""
    parent[i] = i
    size[i] = 1
    root = i
    interior = 0 < x < L - 1 and 0 < y < L - 1 and 0 < z < L - 1
    for k in range(offsets.shape[0]):
        if interior:
            j = i + deltas[k]
        else:
            nx = x + offsets[k, 0]
            ny = y + offsets[k, 1]
            nz = z + offsets[k, 2]
            if nx < 0 or nx >= L or ny < 0 or ny >= L or nz < 0 or nz >= L:
                continue
            j = nx + L * (ny + L * nz)
        if parent[j] < 0:
            continue
        rj = _find(parent, j)
        if rj == root:
            continue
        if size[root] < size[rj]:
            root, rj = rj, root
        parent[rj] = root
        size[root] += size[rj]
    return root


@numba.njit(cache=True)
def _flat_deltas(offsets, L):
    out = np.empty(offsets.shape[0], dtype=np.int64)
    for k in range(offsets.shape[0]):
        out[k] = offsets[k, 0] + L * (offsets[k, 1] + L * offsets[k, 2])
    return out


@numba.njit(cache=True)
def _hk_forest(occupied, L, half):
    """Single raster pass; returns the parent forest (``-1`` marks empty).

    No face nodes here: they would glue together distinct clusters that
    merely touch the same face.  Spanning is read off the resolved roots.
    """
    n = L * L * L
    parent = np.full(n, -1, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    deltas = _flat_deltas(half, L)
    i = 0
    for z in range(L):
        for y in range(L):
            for x in range(L):
                if occupied[i]:
                    _add_site(parent, size, L, x, y, z, i, half, deltas)
                i += 1
    return parent


@numba.njit(cache=True)
def _faces_joined(roots, L):
    """True if some root owns sites on both z = 0 and z = L - 1."""
    n = L * L * L
    top = n - L * L
    on_low = np.zeros(n, dtype=np.bool_)
    for i in range(L * L):
        if roots[i] >= 0:
            on_low[roots[i]] = True
    for i in range(top, n):
        if roots[i] >= 0 and on_low[roots[i]]:
            return True
    return False


@numba.njit(cache=True)
def _resolve(parent):
    out = parent.copy()
    for i in range(out.shape[0]):
        if out[i] >= 0:
            out[i] = _find(out, i)
    return out


@numba.njit(cache=True)
def _renumber(roots, n):
    labels = np.zeros(n, dtype=np.int32)
    first = np.full(roots.shape[0], 0, dtype=np.int32)
    count = 0
    for i in range(n):
        r = roots[i]
        if r < 0:
            continue
        if first[r] == 0:
            count += 1
            first[r] = count
        labels[i] = first[r]
    return labels, count


@numba.njit(cache=True)
def _first_spanning_index(values, L, full, half, grid):
    """Index of the first grid point at which the field spans.

    Sites are bucketed by the first grid point that occupies them and added
    bucket by bucket.  Bucket 0 (everything below ``grid[0]``) arrives in
    raster order, so the half stencil suffices there; later buckets need the
    full stencil.  Returns ``len(grid)`` if the lattice never spans.
    """
    n = L * L * L
    K = grid.shape[0]
    lo = n
    hi = n + 1

    bucket = np.empty(n, dtype=np.int32)
    counts = np.zeros(K + 1, dtype=np.int64)
    g0 = grid[0]
    glast = grid[K - 1]
    for i in range(n):
        v = values[i]
        if v < g0:
            b = 0
        elif v >= glast:
            b = K
        else:
            # number of grid points <= v
            a = 0
            c = K - 1
            while c - a > 1:
                m = (a + c) // 2
                if grid[m] <= v:
                    a = m
                else:
                    c = m
            b = c
        bucket[i] = b
        counts[b] += 1

    start = np.zeros(K + 1, dtype=np.int64)
    for b in range(1, K + 1):
        start[b] = start[b - 1] + counts[b - 1]
    order = np.empty(start[K], dtype=np.int32)
    fill = start.copy()
    for i in range(n):
        b = bucket[i]
        if b < K:
            order[fill[b]] = i
            fill[b] += 1

    parent = np.full(n + 2, -1, dtype=np.int32)
    size = np.zeros(n + 2, dtype=np.int32)
    parent[lo] = lo
    parent[hi] = hi
    size[lo] = 1
    size[hi] = 1
    half_d = _flat_deltas(half, L)
    full_d = _flat_deltas(full, L)
    LL = L * L
    for b in range(K):
        for t in range(start[b], start[b] + counts[b]):
            i = order[t]
            x = i % L
            y = (i // L) % L
            z = i // LL
            if b == 0:
                _add_site(parent, size, L, x, y, z, i, half, half_d)
            else:
                _add_site(parent, size, L, x, y, z, i, full, full_d)
            if z == 0:
                _union(parent, size, i, lo)
            if z == L - 1:
                _union(parent, size, i, hi)
        if _find(parent, lo) == _find(parent, hi):
            return b
    return K


@dataclass(frozen=True, eq=False)
class LabelGrid:
    """Result of labeling one configuration.

    ``labels`` holds 0 for empty sites and 1..cluster_count otherwise,
    numbered by first appearance in raster order.  ``roots`` holds the
    resolved union-find root (a flat site index) per site, -1 when empty.
    """

    geometry: LatticeGeometry
    labels: np.ndarray
    roots: np.ndarray
    cluster_count: int
    spanning: bool

    def clusters(self):
        """Partition of occupied sites as a set of frozensets of flat indices."""
        out = {}
        for i, lab in enumerate(self.labels.tolist()):
            if lab:
                out.setdefault(lab, []).append(i)
        return {frozenset(v) for v in out.values()}


def resolve_roots(parent: np.ndarray) -> np.ndarray:
    """Fully compress a parent array; negative entries stay untouched."""
    return _resolve(np.asarray(parent, dtype=np.int64))


def label(config: Configuration, spec: NeighborhoodSpec) -> LabelGrid:
    """Label the clusters of `config` under adjacency `spec`."""
    geom = config.geometry
    n = geom.site_count
    occ = np.ascontiguousarray(config.occupied, dtype=np.bool_)
    if occ.shape != (n,):
        raise ValueError(f"occupancy has shape {occ.shape}, expected ({n},)")
    parent = _hk_forest(occ, geom.L, spec.half_array())
    roots = _resolve(parent)
    spanning = bool(_faces_joined(roots, geom.L))
    labels, count = _renumber(roots, n)
    return LabelGrid(geom, labels, roots, int(count), spanning)


def first_spanning_index(values: np.ndarray, L: int, spec: NeighborhoodSpec, grid: np.ndarray) -> int:
    """Index of the first point of the sorted `grid` where ``values < p`` spans."""
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be nondecreasing")
    return int(_first_spanning_index(values, L, spec.as_array(), spec.half_array(), grid))


def spanning_only(field: OccupancyField, spec: NeighborhoodSpec, p: float) -> bool:
    """Whether ``threshold_field(field, p)`` spans, with early exit."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    idx = first_spanning_index(field.values, field.geometry.L, spec, np.array([p]))
    return idx == 0


def write_voxel_csv(grid: LabelGrid, path) -> None:
    """Debug dump: one ``x,y,z,label`` row per site."""
    L = grid.geometry.L
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "z", "label"])
        for i, lab in enumerate(grid.labels.tolist()):
            w.writerow([i % L, (i // L) % L, i // (L * L), lab])
