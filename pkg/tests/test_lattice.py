import numpy as np
import pytest

from cubicperc.lattice import (
    LatticeGeometry,
    configuration_from_array,
    generate_field,
    threshold_field,
)


def test_geometry_validation():
    with pytest.raises(ValueError):
        LatticeGeometry(1)
    assert LatticeGeometry(5).site_count == 125


@pytest.mark.parametrize("L", range(2, 9))
def test_flat_index_round_trip(L):
    g = LatticeGeometry(L)
    seen = set()
    for z in range(L):
        for y in range(L):
            for x in range(L):
                i = g.flatten(x, y, z)
                assert g.unflatten(i) == (x, y, z)
                seen.add(i)
    assert seen == set(range(L**3))


def test_field_is_replayable():
    g = LatticeGeometry(10)
    a = generate_field(g, 42, 7)
    b = generate_field(g, 42, 7)
    assert np.array_equal(a.values, b.values)
    assert a.seed_record == (42, 7)


def test_distinct_streams():
    g = LatticeGeometry(10)
    a = generate_field(g, 42, 0).values
    b = generate_field(g, 42, 1).values
    c = generate_field(g, 43, 0).values
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    # no shared values at all between independent streams of this length
    assert np.intersect1d(a, b).size == 0


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        generate_field(LatticeGeometry(4), 1, -1)


def test_field_mean():
    g = LatticeGeometry(100)
    v = generate_field(g, 2024, 0).values
    assert v.size == 10**6
    assert v.min() >= 0.0 and v.max() < 1.0
    assert abs(v.mean() - 0.5) < 0.002


def test_threshold_extremes_and_nesting():
    f = generate_field(LatticeGeometry(12), 3, 0)
    assert not threshold_field(f, 0.0).occupied.any()
    assert threshold_field(f, 1.0).occupied.all()
    prev = threshold_field(f, 0.0).occupied
    for p in np.linspace(0, 1, 41):
        cur = threshold_field(f, p).occupied
        assert np.all(cur[prev])
        prev = cur
    with pytest.raises(ValueError):
        threshold_field(f, 1.5)


def test_occupied_fraction_binomial():
    L, p, n_fields = 16, 0.3, 50
    g = LatticeGeometry(L)
    occ = sum(int(threshold_field(generate_field(g, 9, r), p).occupied.sum()) for r in range(n_fields))
    n = n_fields * L**3
    sigma = np.sqrt(n * p * (1 - p))
    assert abs(occ - n * p) < 4 * sigma


def test_configuration_from_array():
    arr = np.zeros((3, 3, 3), dtype=bool)
    arr[2, 1, 0] = True  # [z, y, x]
    c = configuration_from_array(arr)
    assert c.geometry.L == 3
    assert c.occupied[c.geometry.flatten(0, 1, 2)]
    with pytest.raises(ValueError):
        configuration_from_array(np.zeros(10, dtype=bool))
