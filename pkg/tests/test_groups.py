from __future__ import annotations

import itertools

import pytest

from groupoid_descent.errors import UnknownPreset
from groupoid_descent.groups import (
    PRESET_PERMUTATIONS,
    conjugate,
    find_isomorphism,
    group_from_table,
    is_homomorphism,
    preset_group,
    subgroup_classes,
    subgroups,
)

ORDERS = {"C1": 1, "C2": 2, "C3": 3, "C4": 4, "V4": 4, "S3": 6}


def brute_subgroups(G):
    """Every subset containing the identity and closed under products."""
    out = []
    for r in range(1, G.order + 1):
        for S in itertools.combinations(G.elements, r):
            S = set(S)
            if 0 in S and all(G.mul[a][b] in S for a in S for b in S):
                out.append(frozenset(S))
    return out


@pytest.mark.parametrize("name,order", sorted(ORDERS.items()))
def test_preset_orders_and_axioms(name, order):
    G = preset_group(name)
    assert G.order == order
    for a, b, c in itertools.product(G.elements, repeat=3):
        assert G.mul[G.mul[a][b]][c] == G.mul[a][G.mul[b][c]]
    assert all(G.mul[0][a] == a == G.mul[a][0] for a in G.elements)
    assert all(G.mul[a][G.inv(a)] == 0 for a in G.elements)


@pytest.mark.parametrize("name", sorted(ORDERS))
def test_subgroups_match_subset_search(name):
    G = preset_group(name)
    assert set(subgroups(G)) == set(brute_subgroups(G))


@pytest.mark.parametrize("name,classes", [("C1", 1), ("C2", 2), ("C4", 3), ("V4", 5), ("S3", 4)])
def test_subgroup_classes_count(name, classes):
    G = preset_group(name)
    reps = subgroup_classes(G)
    assert len(reps) == classes
    # classes are disjoint under conjugation
    for H, K in itertools.combinations(reps, 2):
        assert all(conjugate(G, H, g) != K for g in G.elements)


def test_isomorphism_search():
    C4, V4 = preset_group("C4"), preset_group("V4")
    assert find_isomorphism(C4, V4) is None
    f = find_isomorphism(C4, C4)
    assert f is not None and is_homomorphism(C4, C4, f)
    S3 = preset_group("S3")
    assert find_isomorphism(S3, preset_group("C3")) is None


def test_group_from_table_roundtrip():
    G = preset_group("S3")
    H = group_from_table([list(r) for r in G.mul])
    assert find_isomorphism(G, H) is not None


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset_group("C9")
    assert "S3" in PRESET_PERMUTATIONS
