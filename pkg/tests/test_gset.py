from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupoid_descent.errors import LawViolation
from groupoid_descent.fincat import preset_groupoid
from groupoid_descent.groups import group_from_permutations, preset_group
from groupoid_descent.gset import (
    action_from_types,
    action_groupoid,
    actions_up_to_size,
    are_isomorphic,
    classify_action,
    coequalizer,
    compose_maps,
    coproduct,
    copair,
    enumerate_gmaps,
    enumerate_labeled_actions,
    epi_mono_factorize,
    equalizer,
    find_iso,
    identity_map,
    initial,
    is_connected,
    make_action,
    orbit_decomposition,
    orbits,
    product,
    pullback,
    slice_action_equivalence,
    slice_fragment,
    terminal,
    transitive_action,
    transitive_types,
    tuple_map,
)

from conftest import action_pairs, actions, all_functions, relabel

TINY = ["C1", "C2", "C3", "V4", "C2+C3"]


def is_equivariant(X, Y, comps):
    G = X.group
    return all(
        comps[G.dst[f]][X.act[f][i]] == Y.act[f][comps[G.src[f]][i]]
        for f in G.morphisms() for i in range(X.size(G.src[f]))
    )


def brute_maps(X, Y):
    G = X.group
    per_obj = [list(all_functions(X.size(x), Y.size(x))) for x in G.objects()]
    return {c for c in itertools.product(*per_obj) if is_equivariant(X, Y, c)}


def symmetric_group(n):
    if n <= 1:
        return None
    gens = [tuple(range(1, n)) + (0,), (1, 0) + tuple(range(2, n))]
    return group_from_permutations(gens)


def count_homs_to_sn(G, n):
    if n <= 1:
        return 1
    S = symmetric_group(n)
    return sum(
        1 for f in all_functions(G.order, S.order)
        if all(f[G.mul[a][b]] == S.mul[f[a]][f[b]] for a in G.elements for b in G.elements)
    )


def burnside(G, X):
    """Orbit count for a one-object groupoid via fixed points."""
    return sum(sum(1 for i in range(X.size(0)) if X.act[g][i] == i) for g in G.morphisms()) // G.n_morphisms


@given(action_pairs(presets=TINY, max_types=2))
@settings(max_examples=40, deadline=None)
def test_equivariant_maps_match_brute_force(pair):
    X, Y = pair
    if X.total_size > 5 or Y.total_size > 5:
        return
    got = {u.components for u in enumerate_gmaps(X, Y)}
    assert got == brute_maps(X, Y)
    isos = {u.components for u in enumerate_gmaps(X, Y, isos_only=True)}
    assert isos == {c for c in got if all(len(set(p)) == len(p) == Y.size(x) for x, p in enumerate(c))}


@given(actions(presets=["C2", "C3", "C4", "V4", "S3"]))
@settings(max_examples=40, deadline=None)
def test_orbit_count_matches_burnside(X):
    assert len(orbits(X)) == burnside(X.group, X)


@given(actions())
@settings(max_examples=40, deadline=None)
def test_decomposition_is_idempotent_and_invariant(X):
    parts, iso = orbit_decomposition(X)
    assert iso.is_iso()
    assert all(is_connected(P) for P in parts)
    # decomposing a connected summand gives it back
    for P in parts:
        again, _ = orbit_decomposition(P)
        assert len(again) == 1 and are_isomorphic(again[0], P)
    C, _ = coproduct(parts, X.group)
    assert classify_action(C) == classify_action(X)


@given(actions(), st.data())
@settings(max_examples=30, deadline=None)
def test_classification_is_an_iso_invariant(X, data):
    perms = [data.draw(st.permutations(range(X.size(x)))) for x in X.group.objects()]
    Y = relabel(X, perms)
    assert classify_action(Y) == classify_action(X)
    assert find_iso(X, Y) is not None


@given(action_pairs(max_types=2))
@settings(max_examples=30, deadline=None)
def test_product_universal_property(pair):
    X, Y = pair
    P, (p, q) = product(X, Y)
    G = X.group
    assert all(P.size(x) == X.size(x) * Y.size(x) for x in G.objects())
    u = tuple_map([p, q], [p, q])
    assert u.components == identity_map(P).components


@given(action_pairs(presets=["C2", "C3", "S3"], max_types=2), st.data())
@settings(max_examples=30, deadline=None)
def test_pullback_size_matches_fiberwise_count(pair, data):
    X, Y = pair
    Z = data.draw(actions(presets=[_preset_of(X)], max_types=1))
    u = next(enumerate_gmaps(X, Z), None)
    v = next(enumerate_gmaps(Y, Z), None)
    if u is None or v is None:
        return
    P, p1, p2 = pullback(u, v)
    for x in X.group.objects():
        expected = sum(
            1 for i in range(X.size(x)) for j in range(Y.size(x))
            if u.components[x][i] == v.components[x][j]
        )
        assert P.size(x) == expected
    P.check_laws()
    assert compose_maps(u, p1).components == compose_maps(v, p2).components


def _preset_of(X):
    return X.group.name[1:]


def closure_classes(n, pairs):
    """Equivalence classes by naive transitive closure."""
    rel = {(i, i) for i in range(n)} | set(pairs) | {(b, a) for a, b in pairs}
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return len({frozenset(j for j in range(n) if (i, j) in rel) for i in range(n)})


@given(action_pairs(presets=["C1", "C2", "C3"], max_types=2), st.data())
@settings(max_examples=30, deadline=None)
def test_coequalizer_size(pair, data):
    X, Y = pair
    maps = list(enumerate_gmaps(X, Y))
    if not maps:
        return
    u = data.draw(st.sampled_from(maps))
    v = data.draw(st.sampled_from(maps))
    Q, q = coequalizer(u, v)
    assert compose_maps(q, u).components == compose_maps(q, v).components
    for x in X.group.objects():
        pairs = [(u.components[x][i], v.components[x][i]) for i in range(X.size(x))]
        assert Q.size(x) == closure_classes(Y.size(x), pairs)


@given(action_pairs(max_types=2), st.data())
@settings(max_examples=30, deadline=None)
def test_equalizer_and_factorization(pair, data):
    X, Y = pair
    maps = list(itertools.islice(enumerate_gmaps(X, Y), 20))
    if not maps:
        return
    u, v = data.draw(st.sampled_from(maps)), data.draw(st.sampled_from(maps))
    E, e = equalizer(u, v)
    assert compose_maps(u, e).components == compose_maps(v, e).components
    for x in X.group.objects():
        agree = sum(1 for i in range(X.size(x)) if u.components[x][i] == v.components[x][i])
        assert E.size(x) == agree
    fac = epi_mono_factorize(u)
    assert fac.epi.is_surjective() and fac.mono.is_injective()
    assert compose_maps(fac.mono, fac.epi).components == u.components
    assert fac.iso.is_iso()


@pytest.mark.parametrize("name,count", [("C1", 1), ("C2", 2), ("C4", 3), ("V4", 5), ("S3", 4), ("C2+C3", 4)])
def test_transitive_types(name, count):
    G = preset_groupoid(name)
    types = transitive_types(G)
    assert len(types) == count
    for t in types:
        X = transitive_action(G, t)
        X.check_laws()
        assert is_connected(X) and X.total_size == t.size


@pytest.mark.parametrize("name,m", [("C1", 3), ("C2", 3), ("C3", 3), ("S3", 3)])
def test_labeled_actions_count_homomorphisms(name, m):
    G = preset_group(name)
    expected = sum(count_homs_to_sn(G, n) for n in range(m + 1))
    assert sum(1 for _ in enumerate_labeled_actions(preset_groupoid(name), m)) == expected


def test_labeled_action_known_counts():
    counts = {n: sum(1 for _ in enumerate_labeled_actions(preset_groupoid(n), 3)) for n in ("C1", "C2", "S3")}
    assert counts == {"C1": 4, "C2": 8, "S3": 14}


def test_actions_up_to_size_are_distinct_classes():
    G = preset_groupoid("C2")
    reps = actions_up_to_size(G, 2)
    assert len(reps) == 4
    for X, Y in itertools.combinations(reps, 2):
        assert not are_isomorphic(X, Y)
    capped = actions_up_to_size(G, 4, max_fiber=1)
    assert all(X.size(0) <= 1 for X in capped)


def test_action_groupoid_counts():
    G = preset_groupoid("S3")
    X = action_from_types(G, transitive_types(G)[1:3])
    AG, proj = action_groupoid(X)
    assert AG.n_objects == X.total_size
    assert AG.n_morphisms == G.n_morphisms * X.total_size
    proj.check_laws()


def test_regular_product_has_two_orbits():
    G = preset_groupoid("C2")
    R = transitive_action(G, [t for t in transitive_types(G) if len(t.subgroup) == 1][0])
    P, _ = product(R, R)
    assert len(orbits(P)) == 2


def test_slices():
    G = preset_groupoid("C2")
    R = transitive_action(G, [t for t in transitive_types(G) if len(t.subgroup) == 1][0])
    assert len(slice_fragment(terminal(G), 2).objects) == 4
    assert len(slice_fragment(R, 2).objects) == 2
    for S, n in [(terminal(G), 2), (R, 2), (terminal(preset_groupoid("C3")), 3)]:
        assert slice_action_equivalence(S, n)


def test_action_laws_and_coproduct_copair():
    G = preset_groupoid("C2")
    with pytest.raises(LawViolation):
        make_action(G, [[0, 1]], [[0, 1], [0, 0]])
    X = terminal(G)
    C, inj = coproduct([X, X], G)
    fold = copair(inj, [identity_map(X), identity_map(X)])
    assert fold.is_surjective() and not fold.is_injective()
    assert initial(G).total_size == 0
