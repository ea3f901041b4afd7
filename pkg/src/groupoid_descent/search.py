"""Small exhaustive-search engines used by the enumeration routines.

Two flavours:

* :func:`solve` is a backtracking constraint solver over explicit finite
  domains.  Constraints may supply an ``infer`` hook that computes the last
  unassigned variable of their scope, which turns cocycle-style equations into
  unit propagation.
* :func:`propagate_assignments` handles "element graphs": each node takes a
  value from a finite domain and directed edges carry functions forcing the
  value of the head from the value of the tail.  Equivariant maps, morphisms
  of descent data and natural isomorphisms of set-valued functors are all of
  this shape.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterator, Sequence

from .errors import BudgetExceeded

DEFAULT_BUDGET = 10**7


class Budget:
    """Counter of candidate checks; raises once ``limit`` is passed."""

    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.limit = limit
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(f"search exceeded {self.limit} candidate checks")


def as_budget(budget: Budget | int | None) -> Budget:
    if budget is None:
        return Budget()
    if isinstance(budget, Budget):
        return budget
    return Budget(budget)


@dataclass
class Constraint:
    scope: tuple
    check: Callable[[dict], bool]
    infer: Callable[[dict, Hashable], Any] | None = None


def solve(
    variables: Sequence[Hashable],
    domains: dict,
    constraints: Sequence[Constraint],
    budget: Budget | int | None = None,
) -> Iterator[dict]:
    """Yield every total assignment satisfying all constraints.

    Variables are branched in the given order; forced values from ``infer``
    are assigned as soon as a constraint has a single open variable.
    """
    budget = as_budget(budget)
    by_var: dict = {v: [] for v in variables}
    for c in constraints:
        for v in set(c.scope):
            by_var[v].append(c)
    domain_sets = {v: set(domains[v]) for v in variables}
    assign: dict = {}

    def propagate(start) -> list | None:
        """Assign forced values; return the list of assigned vars or None on conflict."""
        added = []
        queue = list(start)
        while queue:
            v = queue.pop()
            for c in by_var[v]:
                open_vars = {u for u in c.scope if u not in assign}
                if not open_vars:
                    budget.tick()
                    if not c.check(assign):
                        return _undo(added)
                elif len(open_vars) == 1 and c.infer is not None:
                    (u,) = open_vars
                    value = c.infer(assign, u)
                    budget.tick()
                    if value is None or value not in domain_sets[u]:
                        return _undo(added)
                    assign[u] = value
                    added.append(u)
                    queue.append(u)
        return added

    def _undo(added):
        for u in added:
            del assign[u]
        return None

    def rec(idx: int) -> Iterator[dict]:
        while idx < len(variables) and variables[idx] in assign:
            idx += 1
        if idx == len(variables):
            yield dict(assign)
            return
        v = variables[idx]
        for value in domains[v]:
            budget.tick()
            assign[v] = value
            added = propagate([v])
            if added is not None:
                yield from rec(idx + 1)
                for u in added:
                    del assign[u]
            del assign[v]

    # constraints with empty scope, or all-unary checks on fixed data
    for c in constraints:
        if not c.scope and not c.check(assign):
            return
    yield from rec(0)


def propagate_assignments(
    nodes: Sequence[Hashable],
    domain: Callable[[Hashable], Sequence],
    edges: dict,
    injective_key: Callable[[Hashable], Hashable] | None = None,
    budget: Budget | int | None = None,
) -> Iterator[dict]:
    """Enumerate node valuations compatible with functional edges.

    ``edges[u]`` is a list of ``(v, fn)`` pairs meaning ``value[v] ==
    fn(value[u])``.  When ``injective_key`` is given, nodes sharing a key must
    receive pairwise distinct values.
    """
    budget = as_budget(budget)
    value: dict = {}
    used: dict = {}

    def assign_from(root, val) -> list | None:
        stack = [(root, val)]
        added = []
        while stack:
            u, x = stack.pop()
            budget.tick()
            if u in value:
                if value[u] != x:
                    return _rollback(added)
                continue
            if injective_key is not None:
                key = injective_key(u)
                bucket = used.setdefault(key, set())
                if x in bucket:
                    return _rollback(added)
                bucket.add(x)
            value[u] = x
            added.append(u)
            for v, fn in edges.get(u, ()):
                stack.append((v, fn(x)))
        return added

    def _rollback(added):
        for u in added:
            if injective_key is not None:
                used[injective_key(u)].discard(value[u])
            del value[u]
        return None

    order = list(nodes)

    def rec(idx: int) -> Iterator[dict]:
        while idx < len(order) and order[idx] in value:
            idx += 1
        if idx == len(order):
            yield dict(value)
            return
        u = order[idx]
        for x in domain(u):
            added = assign_from(u, x)
            if added is None:
                continue
            yield from rec(idx + 1)
            _rollback(added)

    yield from rec(0)
