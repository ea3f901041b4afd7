from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupoid_descent.errors import BudgetExceeded
from groupoid_descent.search import Budget, Constraint, propagate_assignments, solve


@given(st.integers(1, 4), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_solve_all_different_matches_permutations(n, k):
    variables = list(range(n))
    domains = {v: list(range(k + n - 1)) for v in variables}
    cons = [
        Constraint((a, b), lambda asg, a=a, b=b: asg[a] != asg[b])
        for a, b in itertools.combinations(variables, 2)
    ]
    got = {tuple(s[v] for v in variables) for s in solve(variables, domains, cons)}
    expected = set(itertools.permutations(range(k + n - 1), n))
    assert got == expected


def test_budget_exhaustion():
    variables = list(range(6))
    domains = {v: list(range(6)) for v in variables}
    with pytest.raises(BudgetExceeded):
        list(solve(variables, domains, [], Budget(100)))


def test_propagation_follows_edges():
    # x1 = x0 + 1 mod 3, x2 = x1 + 1 mod 3
    edges = {0: [(1, lambda v: (v + 1) % 3)], 1: [(2, lambda v: (v + 1) % 3)]}
    sols = list(propagate_assignments([0, 1, 2], lambda n: range(3), edges))
    assert sorted((s[0], s[1], s[2]) for s in sols) == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]


def test_propagation_injective_key():
    sols = list(propagate_assignments([0, 1], lambda n: range(2), {}, lambda n: "k"))
    assert sorted((s[0], s[1]) for s in sols) == [(0, 1), (1, 0)]
