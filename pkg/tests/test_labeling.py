import csv

import numpy as np
import pytest

from cubicperc.labeling import (
    EMPTY,
    first_spanning_index,
    label,
    resolve_roots,
    spanning_only,
    write_voxel_csv,
)
from cubicperc.lattice import (
    LatticeGeometry,
    configuration_from_array,
    generate_field,
    threshold_field,
)
from cubicperc.neighborhood import CANONICAL_NAMES, all_neighborhoods, by_name

from oracles import bfs_clusters

SPECS = all_neighborhoods()


# A full lattice is one cluster unless the stencil preserves a parity:
# face diagonals keep x+y+z mod 2 (two sublattices), body diagonals flip
# all three coordinate parities together (four sublattices).
FULL_LATTICE_CLUSTERS = {"NN": 1, "2NN": 2, "3NN": 4, "NN+2NN": 1, "NN+3NN": 1, "2NN+3NN": 1, "NN+2NN+3NN": 1}


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_empty_and_full(spec):
    L = 6
    f = generate_field(LatticeGeometry(L), 1, 0)
    empty = label(threshold_field(f, 0.0), spec)
    assert empty.cluster_count == 0 and not empty.spanning
    assert np.all(empty.labels == EMPTY)
    full = label(threshold_field(f, 1.0), spec)
    assert full.spanning
    assert full.cluster_count == FULL_LATTICE_CLUSTERS[spec.name]
    assert full.clusters() == bfs_clusters([True] * L**3, L, spec.name)[0]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_matches_bfs_small_sample(spec):
    rng = np.random.default_rng(5)
    for L in (3, 4, 5):
        for p in (0.2, 0.45):
            occ = rng.random(L**3) < p
            got = label(configuration_from_array(occ), spec)
            clusters, spans = bfs_clusters(occ.tolist(), L, spec.name)
            assert got.clusters() == clusters
            assert got.cluster_count == len(clusters)
            assert got.spanning == spans


def test_handbuilt_cases():
    L = 3
    g = LatticeGeometry(L)
    occ = np.zeros(L**3, dtype=bool)
    # straight column along z: spans for NN, not for 2NN or 3NN alone
    for z in range(L):
        occ[g.flatten(1, 1, z)] = True
    c = configuration_from_array(occ)
    assert label(c, by_name("NN")).spanning
    assert label(c, by_name("2NN")).cluster_count == 3
    assert not label(c, by_name("3NN")).spanning
    # body-diagonal staircase: only stencils containing 3NN connect it
    occ[:] = False
    for k in range(L):
        occ[g.flatten(k, k, k)] = True
    c = configuration_from_array(occ)
    for name in CANONICAL_NAMES:
        assert label(c, by_name(name)).spanning == ("3NN" in name)


def test_labels_numbered_by_first_appearance():
    rng = np.random.default_rng(11)
    occ = rng.random(6**3) < 0.3
    lg = label(configuration_from_array(occ), by_name("NN"))
    firsts = [lab for lab in lg.labels.tolist() if lab]
    order = list(dict.fromkeys(firsts))
    assert order == list(range(1, lg.cluster_count + 1))


def test_resolution_idempotent():
    rng = np.random.default_rng(2)
    occ = rng.random(7**3) < 0.35
    lg = label(configuration_from_array(occ), by_name("NN+3NN"))
    again = resolve_roots(lg.roots)
    assert np.array_equal(again, lg.roots)
    assert np.all((lg.roots < 0) == ~occ)


def test_adjacency_symmetry_spot_check():
    # a lone pair linked by each offset is one cluster whichever site comes first
    L = 3
    g = LatticeGeometry(L)
    for spec in SPECS:
        for o in spec.offsets:
            occ = np.zeros(L**3, dtype=bool)
            a = g.flatten(1, 1, 1)
            b = g.flatten(1 + o[0], 1 + o[1], 1 + o[2])
            occ[[a, b]] = True
            assert label(configuration_from_array(occ), spec).cluster_count == 1


def test_spanning_monotone_in_stencil():
    rng = np.random.default_rng(3)
    for _ in range(30):
        occ = rng.random(8**3) < rng.uniform(0.05, 0.4)
        c = configuration_from_array(occ)
        spans = {s.name: label(c, s).spanning for s in SPECS}
        for a in SPECS:
            for b in SPECS:
                if set(a.offsets) <= set(b.offsets) and spans[a.name]:
                    assert spans[b.name]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_incremental_agrees_with_full_labeling(spec):
    g = LatticeGeometry(10)
    grid = np.round(np.linspace(0.0, 0.6, 31), 12)
    for r in range(15):
        f = generate_field(g, 77, r)
        flags = [label(threshold_field(f, p), spec).spanning for p in grid]
        k = first_spanning_index(f.values, g.L, spec, grid)
        assert flags == [i >= k for i in range(len(grid))]
        for i in (0, 7, 20, 30):
            assert spanning_only(f, spec, grid[i]) == flags[i]


def test_spanning_only_extremes():
    f = generate_field(LatticeGeometry(2), 1, 0)
    for spec in SPECS:
        assert not spanning_only(f, spec, 0.0)
        assert spanning_only(f, spec, 1.0)


def test_first_spanning_index_validates_grid():
    v = np.zeros(8)
    with pytest.raises(ValueError):
        first_spanning_index(v, 2, by_name("NN"), np.array([0.5, 0.2]))


def test_large_lattice_flat_arrays():
    L = 128
    f = generate_field(LatticeGeometry(L), 0, 0)
    lg = label(threshold_field(f, 0.3116), by_name("NN"))
    assert lg.labels.shape == (L**3,) and lg.labels.dtype == np.int32
    assert lg.roots.shape == (L**3,)
    assert lg.cluster_count > 0


def test_voxel_dump(tmp_path):
    occ = np.zeros(8, dtype=bool)
    occ[[0, 4]] = True
    lg = label(configuration_from_array(occ), by_name("NN"))
    path = tmp_path / "vox.csv"
    write_voxel_csv(lg, path)
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == 8
    assert rows[4] == {"x": "0", "y": "0", "z": "1", "label": "1"}
    assert rows[1]["label"] == "0"
