"""Coordination shells of the simple cubic lattice and their unions.

The first three shells all fit inside the 3x3x3 cube around a site:

    NN   6 unit-axis offsets       |o|^2 = 1
    2NN  12 face diagonals         |o|^2 = 2
    3NN  8 body diagonals          |o|^2 = 3

Any nonempty union of them is a :class:`NeighborhoodSpec`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

SHELLS = ("NN", "2NN", "3NN")

# squared norm of the members of each shell
_SHELL_NORM2 = {"NN": 1, "2NN": 2, "3NN": 3}

# Table order: the three basic shells first, then the mixed ones.
CANONICAL_NAMES = (
    "NN",
    "2NN",
    "3NN",
    "NN+2NN",
    "NN+3NN",
    "2NN+3NN",
    "NN+2NN+3NN",
)


def _sort_key(o):
    return (o[2], o[1], o[0])


@dataclass(frozen=True)
class NeighborhoodSpec:
    """An adjacency stencil on the simple cubic lattice.

    Attributes
    ----------
    name : str
        Canonical name, shells joined by ``+`` in NN < 2NN < 3NN order.
    offsets : tuple of (dx, dy, dz)
        Sorted by ``(dz, dy, dx)``; symmetric under negation.
    """

    name: str
    offsets: tuple

    @property
    def z(self) -> int:
        """Coordination number."""
        return len(self.offsets)

    @property
    def shells(self) -> tuple:
        return tuple(self.name.split("+"))

    def as_array(self) -> np.ndarray:
        """Offsets as an ``(z, 3)`` int64 array in canonical order."""
        return np.array(self.offsets, dtype=np.int64).reshape(-1, 3)

    def half_array(self) -> np.ndarray:
        return np.array(half_stencil(self), dtype=np.int64).reshape(-1, 3)

    def __repr__(self):
        return f"NeighborhoodSpec({self.name!r}, z={self.z})"


def _shell_offsets(kind):
    norm2 = _SHELL_NORM2[kind]
    out = [
        o
        for o in itertools.product((-1, 0, 1), repeat=3)
        if o[0] ** 2 + o[1] ** 2 + o[2] ** 2 == norm2
    ]
    return sorted(out, key=_sort_key)


def _normalize_shell(kind):
    if not isinstance(kind, str):
        raise ValueError(f"shell id must be a string, got {kind!r}")
    k = kind.strip().upper()
    if k not in SHELLS:
        raise ValueError(f"unknown shell {kind!r}; expected one of {', '.join(SHELLS)}")
    return k


def shell(kind: str) -> NeighborhoodSpec:
    """Return one of the three basic shells, ``"NN"``, ``"2NN"`` or ``"3NN"``."""
    k = _normalize_shell(kind)
    return NeighborhoodSpec(k, tuple(_shell_offsets(k)))


def combine(shells) -> NeighborhoodSpec:
    """Union of basic shells.

    Raises
    ------
    ValueError
        If `shells` is empty, names an unknown shell, or repeats one.
    """
    kinds = [_normalize_shell(s) for s in shells]
    if not kinds:
        raise ValueError("combine() needs at least one shell")
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"duplicate shells in {list(shells)!r}")
    kinds.sort(key=SHELLS.index)
    offsets = []
    for k in kinds:
        offsets.extend(_shell_offsets(k))
    offsets.sort(key=_sort_key)
    return NeighborhoodSpec("+".join(kinds), tuple(offsets))


def half_stencil(spec: NeighborhoodSpec) -> list:
    """Offsets pointing at sites visited earlier in raster (z, y, x) order."""
    return [
        o
        for o in spec.offsets
        if o[2] < 0 or (o[2] == 0 and o[1] < 0) or (o[2] == 0 and o[1] == 0 and o[0] < 0)
    ]


def by_name(name: str) -> NeighborhoodSpec:
    """Look up a neighborhood by name, case-insensitively (``"nn+3nn"`` works).

    Shell order in the name does not matter.
    """
    parts = [p for p in str(name).replace(" ", "").upper().split("+")]
    try:
        spec = combine(parts)
    except ValueError:
        raise ValueError(
            f"unknown neighborhood {name!r}; valid names: {', '.join(CANONICAL_NAMES)}"
        ) from None
    return spec


def all_neighborhoods() -> list:
    return [by_name(n) for n in CANONICAL_NAMES]
