from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupoid_descent.errors import FragmentNotClosed
from groupoid_descent.fincat import (
    discrete_groupoid,
    groupoids_equivalent,
    preset_groupoid,
    terminal_category,
)
from groupoid_descent.galois import (
    ConstantFiber,
    EvaluationFiber,
    action_presentation,
    check_axioms_on_fragment,
    check_closure,
    component_split,
    detect_mono_epi,
    exact_functors_from_fsets,
    factor_through_component,
    fsets_fragment,
    fundamental_groupoid,
    terminal_decomposition,
)
from groupoid_descent.gset import random_gmap

from conftest import SMALL_PRESETS, action_pairs


@pytest.mark.parametrize("name", SMALL_PRESETS)
def test_reconstruction_is_equivalent(name):
    G = preset_groupoid(name)
    res = fundamental_groupoid(action_presentation(G, bound=4, all_fibers=True))
    assert groupoids_equivalent(res.groupoid, G)


def test_reconstructed_s3_has_six_automorphisms():
    res = fundamental_groupoid(action_presentation(preset_groupoid("S3"), bound=4))
    assert res.groupoid.n_objects == 1 and res.groupoid.n_morphisms == 6


@pytest.mark.parametrize("name", ["C2", "S3", "C2+C3"])
def test_axioms_hold_for_evaluation_fibers(name):
    P = action_presentation(preset_groupoid(name), bound=4)
    out = check_axioms_on_fragment(P.model, P.fibers, P.witness, samples=60, seed=3)
    assert out["verdict"], out


def test_constant_fiber_is_not_exact():
    P = action_presentation(preset_groupoid("C2"), bound=4)
    out = check_axioms_on_fragment(P.model, [ConstantFiber()], [0], samples=60, seed=0)
    assert not out["verdict"]


@given(action_pairs(max_types=2), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_mono_epi_detection_matches_pointwise(pair, seed):
    X, Y = pair
    u = random_gmap(X, Y, random.Random(seed))
    if u is None:
        return
    G = X.group
    P = action_presentation(G, bound=2)
    got = detect_mono_epi(P.fibers, u, P.witness)
    injective = all(len(set(c)) == len(c) for c in u.components)
    surjective = all(set(c) == set(range(Y.size(x))) for x, c in enumerate(u.components))
    assert got["mono"] == injective and got["strict_epi"] == surjective


def test_terminal_splits_into_components():
    P = action_presentation(preset_groupoid("C2+C3"), bound=4)
    td = terminal_decomposition(P)
    assert td.d == 2 and td.reindex == [0, 1]
    for i, e in enumerate(td.summands):
        for j in range(td.d):
            assert P.fibers[td.reindex[j]].size(e) == (1 if i == j else 0)
    split = component_split(P, td, bound=4)
    assert split
    assert factor_through_component(EvaluationFiber(1), P, split)[0] == 1
    assert factor_through_component(EvaluationFiber(0), P, split)[0] == 0


def test_connected_presentation_has_one_summand():
    P = action_presentation(preset_groupoid("S3"), bound=3)
    assert terminal_decomposition(P).d == 1


@pytest.mark.parametrize("name", SMALL_PRESETS)
def test_unique_exact_functor_from_finite_sets(name):
    out = exact_functors_from_fsets(preset_groupoid(name))
    assert out["classes"] == 1 and out["exact"] >= 1


def test_closure_check():
    check_closure(terminal_category())
    with pytest.raises(FragmentNotClosed, match="terminal"):
        check_closure(discrete_groupoid(2))
    # sizes up to 2 cannot hold the coproduct 1 + 2
    with pytest.raises(FragmentNotClosed, match="coproduct"):
        check_closure(fsets_fragment(2))
