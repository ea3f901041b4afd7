from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupoid_descent.descent import (
    DescentCategory,
    SetTarget,
    build_cech_diagram,
    cocycle_violations,
    corrupt_datum,
    datum_action,
    action_datum,
    fiber_bound,
    glue_descent_datum,
    kappa_object,
    naturality_violations,
    verify_stack,
)
from groupoid_descent.errors import CocycleViolation, NotJointlySurjective
from groupoid_descent.fincat import groupoids_equivalent, preset_groupoid
from groupoid_descent.groups import preset_group
from groupoid_descent.gset import (
    action_from_types,
    are_isomorphic,
    coproduct,
    identity_map,
    make_map,
    terminal,
    transitive_types,
)
from groupoid_descent.vankampen import component_covering, regular_covering

from test_gset import count_homs_to_sn


def torsor(name, bound):
    G = preset_groupoid(name)
    U = terminal(G)
    return build_cech_diagram(G, U, regular_covering(G, U), bound=bound)


@pytest.mark.parametrize("name,bound", [("C2", 4), ("C3", 6), ("C3", 9), ("C4", 8)])
def test_labeled_torsor_data_count_homomorphisms(name, bound):
    D = torsor(name, bound)
    m = D.bound
    expected = sum(count_homs_to_sn(preset_group(name), n) for n in range(m + 1))
    assert len(DescentCategory(D, SetTarget()).objects()) == expected


def test_fiber_bound_semantics():
    assert torsor("C2", 4).bound == 2
    assert torsor("C3", 4).bound == 1
    assert torsor("S3", 6).bound == 1
    assert fiber_bound(10, []) == 10


def test_torsor_diagram_shape():
    D = torsor("C2", 4)
    assert D.apex.n_objects == 1 and D.apex.n_morphisms == 2
    assert [L.K.n_objects for L in D.singles] == [1]
    # the square of the regular C2-set splits into two orbits
    assert D.pairs[(0, 0)].K.n_objects == 2
    assert D.triples[(0, 0, 0)].K.n_objects == 4


@pytest.mark.parametrize("name,bound", [("C2", 4), ("C3", 4), ("S3", 6)])
def test_every_datum_glues(name, bound):
    D = torsor(name, bound)
    cat = DescentCategory(D, SetTarget())
    for d in cat.objects():
        Y, iso = glue_descent_datum(D, d, cat)
        assert iso.is_iso()
        assert are_isomorphic(datum_action(cat.DQ, d), datum_action(cat.DQ, kappa_object(D, SetTarget(), Y)))


@pytest.mark.parametrize("name,bound", [("C2", 4), ("C3", 4), ("S3", 6)])
def test_corrupted_datum_is_rejected(name, bound):
    D = torsor(name, bound)
    cat = DescentCategory(D, SetTarget())
    d = next(x for x in cat.objects() if sum(xi.total_size for xi in x.x) > 0)
    bad = corrupt_datum(D, d)
    assert cocycle_violations(D, SetTarget(), bad)
    with pytest.raises(CocycleViolation):
        glue_descent_datum(D, bad, cat)


@pytest.mark.parametrize("name,bound", [("C2", 4), ("C3", 4), ("S3", 6)])
def test_stack_verifier_passes(name, bound):
    rep = verify_stack(torsor(name, bound), samples=60, seed=1)
    assert rep.verdict, rep.summary()


def test_stack_verifier_flags_corruption():
    D = torsor("C2", 4)
    cat = DescentCategory(D, SetTarget())
    bad = corrupt_datum(D, cat.objects()[-1])
    rep = verify_stack(D, samples=20, extra_data=[bad])
    assert not rep.verdict and rep.violations


def test_covering_must_be_jointly_surjective():
    G = preset_groupoid("C2")
    point = terminal(G)
    U2, _ = coproduct([point, point], G)
    with pytest.raises(NotJointlySurjective):
        build_cech_diagram(G, U2, [make_map(point, U2, [[0]])])


@given(
    st.sampled_from(["C2", "C3", "S3", "C2+C3"]),
    st.sampled_from(["regular", "components", "identity"]),
    st.data(),
)
@settings(max_examples=25, deadline=None)
def test_kappa_images_satisfy_cocycle_and_glue_back(name, kind, data):
    G = preset_groupoid(name)
    U = terminal(G)
    cov = {
        "regular": lambda: regular_covering(G, U),
        "components": lambda: component_covering(U),
        "identity": lambda: [identity_map(U)],
    }[kind]()
    probe = build_cech_diagram(G, U, cov, fiber=1)
    # the apex of the point is equivalent to G itself
    assert groupoids_equivalent(probe.apex, G)
    types = transitive_types(probe.apex)
    X = action_from_types(probe.apex, data.draw(st.lists(st.sampled_from(types), max_size=2)))
    m = max([1] + [X.size(k) for k in probe.apex.objects()])
    D = build_cech_diagram(G, U, cov, fiber=m)
    d = kappa_object(D, SetTarget(), X)
    assert not cocycle_violations(D, SetTarget(), d)
    assert not naturality_violations(D, SetTarget(), d)
    cat = DescentCategory(D, SetTarget())
    Y, iso = glue_descent_datum(D, d, cat)
    assert iso.is_iso() and are_isomorphic(Y, X)
    # the quiver view round-trips
    assert action_datum(D, cat.DQ, datum_action(cat.DQ, d)) == d
