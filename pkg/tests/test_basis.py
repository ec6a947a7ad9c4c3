import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosehub.basis import (
    BasisKind,
    PartitionError,
    SymmetryClass,
    enumerate_fock,
    feature_matrix,
    features,
    full_basis,
    occupation_string,
    parity_reduce,
    reduced_basis,
    reflect,
    translate,
    translation_orbits,
    write_basis_csv,
)


def test_enumeration_counts():
    assert len(enumerate_fock(6, 5)) == 252
    assert enumerate_fock(2, 1) == [(0, 1), (1, 0)]
    assert len(enumerate_fock(3, 2)) == 6


def test_enumeration_is_sorted_and_valid():
    states = enumerate_fock(4, 3)
    assert states == sorted(states)
    assert all(sum(s) == 3 and len(s) == 4 for s in states)
    assert len(set(states)) == len(states)


def test_enumeration_degenerate_inputs():
    assert enumerate_fock(1, 3) == [(3,)]
    assert enumerate_fock(3, 0) == [(0, 0, 0)]
    with pytest.raises(ValueError):
        enumerate_fock(0, 2)
    with pytest.raises(ValueError):
        enumerate_fock(3, -1)


def test_translation_orbit_count_and_multiplicity():
    orbits = translation_orbits(enumerate_fock(6, 5))
    assert len(orbits) == 42
    # oracle: no 6-site state with 5 bosons is invariant under a proper shift
    for state in enumerate_fock(6, 5):
        for shift in range(1, 6):
            assert translate(state, shift) != state
    assert all(o.multiplicity == 6 for o in orbits)


def test_translation_orbits_small_cases():
    # exhaustive enumeration by hand: {(0,2),(2,0)} and {(1,1)}
    orbits = translation_orbits(enumerate_fock(2, 2))
    members = sorted(sorted(o.members) for o in orbits)
    assert members == [[(0, 2), (2, 0)], [(1, 1)]]
    assert sorted(o.multiplicity for o in orbits) == [1, 2]

    single = translation_orbits(enumerate_fock(1, 3))
    assert len(single) == 1 and single[0].multiplicity == 1


def test_translation_orbits_rejects_incomplete_basis():
    incomplete = enumerate_fock(3, 2)[:-1]
    with pytest.raises(PartitionError):
        translation_orbits(incomplete)


def test_parity_reduction_counts():
    orbits = translation_orbits(enumerate_fock(6, 5))
    classes = parity_reduce(orbits)
    assert len(classes) == 26
    assert sum(c.multiplicity for c in classes) == 252


def test_parity_merges_published_pair():
    classes = reduced_basis(6, 5).classes
    home = {m: i for i, c in enumerate(classes) for m in c.members}
    assert home[(0, 1, 2, 0, 1, 1)] == home[(1, 1, 0, 2, 1, 0)]


def test_self_conjugate_orbit_is_fixed_point():
    orbits = translation_orbits(enumerate_fock(6, 5))
    # the max-stacked state reverses onto a translation of itself
    target = next(o for o in orbits if (5, 0, 0, 0, 0, 0) in o.members)
    assert reflect(target.representative) in target.members
    merged = parity_reduce(orbits)
    match = next(c for c in merged if (5, 0, 0, 0, 0, 0) in c.members)
    assert match.members == target.members


def test_features_examples():
    np.testing.assert_allclose(
        features((1, 1, 1, 1, 1, 0)),
        [1 / 6, 1 / 6, 1 / 6, 1 / 6, 1 / 6, -5 / 6])
    np.testing.assert_allclose(
        features((5, 0, 0, 0, 0, 0)),
        [25 / 6, -5 / 6, -5 / 6, -5 / 6, -5 / 6, -5 / 6])


@given(st.integers(1, 6), st.integers(0, 5), st.integers(0, 1000))
@settings(max_examples=50, deadline=None)
def test_features_sum_to_zero(sites, bosons, pick):
    states = enumerate_fock(sites, bosons)
    state = states[pick % len(states)]
    assert abs(features(state).sum()) < 1e-12


@pytest.mark.parametrize("sites,bosons", [(m, n) for m in range(1, 9)
                                          for n in range(0, 7)])
def test_partition_property(sites, bosons):
    full = enumerate_fock(sites, bosons)
    for kind in (BasisKind.TRANSLATION, BasisKind.REDUCED):
        classes = reduced_basis(sites, bosons, kind).classes
        flat = [m for c in classes for m in c.members]
        assert sorted(flat) == full
        assert sum(c.multiplicity for c in classes) == math.comb(
            bosons + sites - 1, bosons)
        for c in classes:
            assert c.multiplicity % 1 == 0
        if kind is BasisKind.TRANSLATION:
            assert all(sites % c.multiplicity == 0 for c in classes)


def test_orbit_closure():
    for cls in reduced_basis(6, 5, BasisKind.TRANSLATION).classes:
        for member in cls.members:
            for shift in range(6):
                assert translate(member, shift) in cls.members
    for cls in reduced_basis(6, 5).classes:
        for member in cls.members:
            assert reflect(member) in cls.members
            assert translate(member, 1) in cls.members


def test_determinism():
    a = reduced_basis(6, 5)
    b = reduced_basis(6, 5)
    assert a == b
    assert [c.representative for c in a.classes] == sorted(
        c.representative for c in a.classes)


def test_representative_is_smallest_member():
    for cls in reduced_basis(7, 4).classes:
        assert cls.representative == min(cls.members)
    with pytest.raises(ValueError):
        SymmetryClass((1, 0), ((0, 1), (1, 0)))


def test_feature_matrix_modes(reduced26):
    X = feature_matrix(reduced26)
    assert X.shape == (26, 6)
    np.testing.assert_allclose(X.sum(axis=1), 0, atol=1e-12)
    raw = feature_matrix(reduced26, raw=True)
    np.testing.assert_allclose(raw - 5 / 6, X)


def test_basis_csv_dump(tmp_path, reduced26):
    out = tmp_path / "basis.csv"
    write_basis_csv(reduced26, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "class_index,representative_occ,multiplicity,kind"
    assert len(lines) == 27
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[1] == occupation_string(reduced26.classes[0].representative)
    assert first[3] == "reduced"


def test_full_basis_is_singletons():
    full = full_basis(3, 2)
    assert full.dim == 6
    assert all(c.multiplicity == 1 for c in full.classes)
