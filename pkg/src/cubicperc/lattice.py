"""Lattice geometry and reproducible random occupancy.

Seed derivation
---------------
Each realization gets its own Philox4x64 stream keyed by::

    SeedSequence(entropy=master_seed, spawn_key=(L, realization_index))

The uniform field is the first ``L**3`` doubles drawn with
``Generator.random``.  Fields depend only on ``(master_seed, L, index)``, so
any split of realizations across workers yields the same data.  This scheme
is part of the output contract and must not change between versions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LatticeGeometry:
    L: int

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"lattice size must be an integer >= 2, got {self.L!r}")

    @property
    def site_count(self) -> int:
        return self.L**3

    def flatten(self, x, y, z):
        return x + self.L * (y + self.L * z)

    def unflatten(self, i):
        L = self.L
        return i % L, (i // L) % L, i // (L * L)


@dataclass(frozen=True, eq=False)
class OccupancyField:
    geometry: LatticeGeometry
    values: np.ndarray
    seed_record: tuple  # (master_seed, realization_index)


@dataclass(frozen=True, eq=False)
class Configuration:
    geometry: LatticeGeometry
    occupied: np.ndarray
    p: float


def make_rng(master_seed: int, L: int, realization_index: int) -> np.random.Generator:
    if realization_index < 0:
        raise ValueError("realization_index must be >= 0")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(L), int(realization_index)))
    return np.random.Generator(np.random.Philox(ss))


def generate_field(geometry: LatticeGeometry, master_seed: int, realization_index: int) -> OccupancyField:
    """Draw the uniform field for one realization (see module docstring)."""
    rng = make_rng(master_seed, geometry.L, realization_index)
    values = rng.random(geometry.site_count)
    values.flags.writeable = False
    return OccupancyField(geometry, values, (int(master_seed), int(realization_index)))


def threshold_field(field: OccupancyField, p: float) -> Configuration:
    """Occupy every site whose variate is below `p`."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    occ = field.values < p
    occ.flags.writeable = False
    return Configuration(field.geometry, occ, float(p))


def configuration_from_array(occupied) -> Configuration:
    """Wrap an explicit boolean array (flat, or indexed ``[z, y, x]``)."""
    occ = np.asarray(occupied, dtype=bool)
    n = occ.size
    L = round(n ** (1 / 3))
    if L**3 != n:
        raise ValueError(f"{n} sites is not a cube")
    occ = np.ascontiguousarray(occ.reshape(-1))
    return Configuration(LatticeGeometry(L), occ, float("nan"))
