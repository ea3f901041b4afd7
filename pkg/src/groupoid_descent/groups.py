"""Finite groups as Cayley tables, plus the named presets used throughout."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import BudgetExceeded, LawViolation, UnknownPreset

MAX_BRUTE_FORCE_ORDER = 24


@dataclass(frozen=True)
class Group:
    """Group on ``range(order)`` with identity ``0``.

    ``mul[a][b]`` is the product ``a*b`` (apply ``b`` first when elements are
    read as functions).
    """

    mul: tuple
    labels: tuple = ()

    @property
    def order(self) -> int:
        return len(self.mul)

    @property
    def elements(self) -> range:
        return range(len(self.mul))

    def inv(self, a: int) -> int:
        row = self.mul[a]
        return row.index(0)

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.mul[a][x]
            k += 1
        return k

    def generated(self, gens: Sequence[int]) -> frozenset:
        seen = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mul[x][g]
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return frozenset(seen)

    def generators(self) -> tuple:
        """Greedy small generating set."""
        gens: list[int] = []
        span = frozenset({0})
        for a in sorted(self.elements, key=lambda a: (-self.element_order(a), a)):
            if a not in span:
                gens.append(a)
                span = self.generated(gens)
            if len(span) == self.order:
                break
        return tuple(gens)


def group_from_permutations(gens: Sequence[Sequence[int]], name: str = "") -> Group:
    """Close a set of permutations (tuples) under composition."""
    degree = len(gens[0]) if gens else 1
    ident = tuple(range(degree))
    elems = [ident]
    index = {ident: 0}
    frontier = [ident]
    while frontier:
        p = frontier.pop(0)
        for g in gens:
            q = tuple(g[i] for i in p)
            if q not in index:
                index[q] = len(elems)
                elems.append(q)
                frontier.append(q)
    # a*b = a after b
    mul = tuple(
        tuple(index[tuple(a[i] for i in b)] for b in elems) for a in elems
    )
    return Group(mul=mul, labels=tuple(elems))


def group_from_table(mul: Sequence[Sequence[int]]) -> Group:
    n = len(mul)
    table = tuple(tuple(int(x) for x in row) for row in mul)
    for row in table:
        if len(row) != n or sorted(row) != list(range(n)):
            raise LawViolation("latin square", row)
    if table[0] != tuple(range(n)):
        raise LawViolation("identity law", 0, "element 0 must be the identity")
    for a, b, c in itertools.product(range(n), repeat=3):
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise LawViolation("associativity", (a, b, c))
    return Group(mul=table)


PRESET_PERMUTATIONS = {
    "C1": [(0,)],
    "C2": [(1, 0)],
    "C3": [(1, 2, 0)],
    "C4": [(1, 2, 3, 0)],
    "V4": [(1, 0, 3, 2), (2, 3, 0, 1)],
    "S3": [(1, 0, 2), (1, 2, 0)],
}


def preset_group(name: str) -> Group:
    try:
        gens = PRESET_PERMUTATIONS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset group {name!r}") from None
    return group_from_permutations(gens, name)


def subgroups(G: Group) -> list[frozenset]:
    """All subgroups, by closing under adjoining one element at a time."""
    if G.order > MAX_BRUTE_FORCE_ORDER * 4:
        raise BudgetExceeded(f"group of order {G.order} too large for subgroup search")
    trivial = frozenset({0})
    found = {trivial}
    frontier = [trivial]
    while frontier:
        H = frontier.pop()
        for g in G.elements:
            if g in H:
                continue
            K = G.generated(list(H) + [g])
            if K not in found:
                found.add(K)
                frontier.append(K)
    return sorted(found, key=lambda H: (len(H), sorted(H)))


def conjugate(G: Group, H: frozenset, g: int) -> frozenset:
    gi = G.inv(g)
    return frozenset(G.mul[G.mul[g][h]][gi] for h in H)


def subgroup_classes(G: Group) -> list[frozenset]:
    """One representative per conjugacy class of subgroups (smallest lexicographic member)."""
    reps: list[frozenset] = []
    seen: set = set()
    for H in subgroups(G):
        if H in seen:
            continue
        cls = {conjugate(G, H, g) for g in G.elements}
        seen |= cls
        reps.append(min(cls, key=lambda K: sorted(K)))
    return reps


def is_homomorphism(G: Group, H: Group, f: Sequence[int]) -> bool:
    return all(
        f[G.mul[a][b]] == H.mul[f[a]][f[b]] for a in G.elements for b in G.elements
    )


def find_isomorphism(G: Group, H: Group) -> tuple | None:
    """Brute-force search over generator images, pruned by element orders."""
    if G.order != H.order:
        return None
    if max(G.order, H.order) > MAX_BRUTE_FORCE_ORDER:
        raise BudgetExceeded(f"vertex group order {G.order} above brute-force bound")
    order_g = sorted(G.element_order(a) for a in G.elements)
    order_h = sorted(H.element_order(a) for a in H.elements)
    if order_g != order_h:
        return None
    gens = G.generators()
    candidates = [
        [b for b in H.elements if H.element_order(b) == G.element_order(g)] for g in gens
    ]
    for images in itertools.product(*candidates):
        f = _extend(G, H, gens, images)
        if f is not None and len(set(f)) == G.order and is_homomorphism(G, H, f):
            return tuple(f)
    return None


def _extend(G: Group, H: Group, gens, images) -> list | None:
    f: list = [None] * G.order
    f[0] = 0
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for g, img in zip(gens, images):
            y = G.mul[x][g]
            val = H.mul[f[x]][img]
            if f[y] is None:
                f[y] = val
                frontier.append(y)
            elif f[y] != val:
                return None
    return f
