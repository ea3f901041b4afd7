"""Finite sets with an action of a finite groupoid, and the maps between them.

An action ``X`` of a groupoid ``G`` stores, per object ``x``, a tuple of
element labels ``carrier[x]`` and, per morphism ``f: x -> y``, an index
table ``act[f]`` sending positions in ``carrier[x]`` to positions in
``carrier[y]``.  Viewed this way an action is simply a functor ``G -> FSets``
where a finite set is its size; :meth:`GAction.obj` / :meth:`GAction.mor`
expose exactly that.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .errors import BudgetExceeded, LawViolation, MalformedTable
from .fincat import (
    EquivalenceWitness,
    FiniteCategory,
    FiniteGroupoid,
    Functor,
    Refutation,
    connected_components,
    decide_equivalence,
    materialize,
)
from .groups import subgroup_classes
from .search import Budget, as_budget, propagate_assignments


class Quiver:
    """Finite directed graph; actions on it assign a bijection to every edge.

    Families of actions glued by isomorphisms (descent data) are exactly
    such representations, so every pointwise construction below applies.
    """

    def __init__(self, src, dst, obj_labels=None, mor_labels=None, name=""):
        self.src = tuple(src)
        self.dst = tuple(dst)
        n_obj = 1 + max(self.src + self.dst, default=-1)
        self.obj_labels = tuple(obj_labels) if obj_labels is not None else tuple(range(n_obj))
        self.mor_labels = tuple(mor_labels) if mor_labels is not None else tuple(range(len(self.src)))
        self.identity = ()
        self.name = name
        self._out: dict = {}
        for f, a in enumerate(self.src):
            self._out.setdefault(a, []).append(f)

    @property
    def n_objects(self) -> int:
        return len(self.obj_labels)

    @property
    def n_morphisms(self) -> int:
        return len(self.src)

    def objects(self) -> list:
        return list(range(self.n_objects))

    def morphisms(self) -> range:
        return range(self.n_morphisms)

    def out_of(self, a: int) -> list:
        return self._out.get(a, [])


@dataclass(frozen=True)
class GAction:
    group: FiniteGroupoid | Quiver
    carrier: tuple
    act: tuple

    def __post_init__(self):
        G = self.group
        if len(self.carrier) != G.n_objects or len(self.act) != G.n_morphisms:
            raise MalformedTable("action tables do not match the groupoid")

    def size(self, x: int) -> int:
        return len(self.carrier[x])

    @property
    def total_size(self) -> int:
        return sum(len(c) for c in self.carrier)

    def obj(self, x: int) -> int:
        return len(self.carrier[x])

    def mor(self, f: int) -> tuple:
        return self.act[f]

    def elements(self):
        for x, c in enumerate(self.carrier):
            for i in range(len(c)):
                yield x, i

    def check_laws(self) -> None:
        G = self.group
        for f in G.morphisms():
            a, b = G.src[f], G.dst[f]
            t = self.act[f]
            if len(t) != self.size(a) or any(not 0 <= v < self.size(b) for v in t):
                raise LawViolation("action endpoints", f)
            if len(set(t)) != len(t) or len(t) != self.size(b):
                raise LawViolation("action bijectivity", f)
        if isinstance(G, Quiver):
            return
        for a in G.objects():
            if self.act[G.identity[a]] != tuple(range(self.size(a))):
                raise LawViolation("action identity", a)
        for (g, f), h in G.table.items():
            if tuple(self.act[g][v] for v in self.act[f]) != self.act[h]:
                raise LawViolation("action composition", (g, f))

    def describe(self) -> str:
        return "{" + ", ".join(f"{x}:{len(c)}" for x, c in enumerate(self.carrier)) + "}"


@dataclass(frozen=True)
class GMap:
    source: GAction
    target: GAction
    components: tuple

    def __call__(self, x: int, i: int) -> int:
        return self.components[x][i]

    def check_laws(self) -> None:
        X, Y = self.source, self.target
        G = X.group
        for x in G.objects():
            comp = self.components[x]
            if len(comp) != X.size(x) or any(not 0 <= v < Y.size(x) for v in comp):
                raise LawViolation("map endpoints", x)
        for f in G.morphisms():
            a = G.src[f]
            for i in range(X.size(a)):
                if self.components[G.dst[f]][X.act[f][i]] != Y.act[f][self.components[a][i]]:
                    raise LawViolation("equivariance", (f, i))

    def is_injective(self) -> bool:
        return all(len(set(c)) == len(c) for c in self.components)

    def is_surjective(self) -> bool:
        return all(
            set(c) == set(range(self.target.size(x))) for x, c in enumerate(self.components)
        )

    def is_iso(self) -> bool:
        return self.is_injective() and self.is_surjective()


def make_action(G: FiniteGroupoid, carrier, act, check: bool = True) -> GAction:
    X = GAction(G, tuple(tuple(c) for c in carrier), tuple(tuple(t) for t in act))
    if check:
        X.check_laws()
    return X


def make_map(X: GAction, Y: GAction, components, check: bool = True) -> GMap:
    u = GMap(X, Y, tuple(tuple(c) for c in components))
    if check:
        u.check_laws()
    return u


def identity_map(X: GAction) -> GMap:
    return GMap(X, X, tuple(tuple(range(len(c))) for c in X.carrier))


def compose_maps(v: GMap, u: GMap) -> GMap:
    """``v after u``."""
    return GMap(
        u.source, v.target,
        tuple(tuple(vc[i] for i in uc) for vc, uc in zip(v.components, u.components)),
    )


def inverse_map(u: GMap) -> GMap:
    comps = []
    for c in u.components:
        inv = [0] * len(c)
        for i, v in enumerate(c):
            inv[v] = i
        comps.append(tuple(inv))
    return GMap(u.target, u.source, tuple(comps))


# ------------------------------------------------------------- limits


def terminal(G: FiniteGroupoid) -> GAction:
    return GAction(G, tuple(("*",) for _ in G.objects()), tuple((0,) for _ in G.morphisms()))


def initial(G: FiniteGroupoid) -> GAction:
    return GAction(G, tuple(() for _ in G.objects()), tuple(() for _ in G.morphisms()))


def to_terminal(X: GAction) -> GMap:
    return GMap(X, terminal(X.group), tuple((0,) * len(c) for c in X.carrier))


def from_initial(X: GAction) -> GMap:
    return GMap(initial(X.group), X, tuple(() for _ in X.carrier))


def wide_pullback(maps: Sequence[GMap]) -> tuple[GAction, list[GMap]]:
    """Limit of ``X_k -> S``; elements are tuples of positions with a common image."""
    if not maps:
        raise MalformedTable("wide pullback needs at least one map")
    G = maps[0].target.group
    tuples_at = []
    for x in G.objects():
        choices = [range(u.source.size(x)) for u in maps]
        tuples_at.append(
            [t for t in itertools.product(*choices)
             if len({u.components[x][i] for u, i in zip(maps, t)}) == 1]
        )
    index = [{t: n for n, t in enumerate(ts)} for ts in tuples_at]
    carrier = tuple(
        tuple(tuple(u.source.carrier[x][i] for u, i in zip(maps, t)) for t in ts)
        for x, ts in enumerate(tuples_at)
    )
    act = []
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        act.append(tuple(
            index[b][tuple(u.source.act[f][i] for u, i in zip(maps, t))] for t in tuples_at[a]
        ))
    P = GAction(G, carrier, tuple(act))
    projections = [
        GMap(P, u.source, tuple(tuple(t[k] for t in ts) for ts in tuples_at))
        for k, u in enumerate(maps)
    ]
    return P, projections


def pullback(u: GMap, v: GMap) -> tuple[GAction, GMap, GMap]:
    P, (p1, p2) = wide_pullback([u, v])
    return P, p1, p2


def product(*factors: GAction) -> tuple[GAction, list[GMap]]:
    if not factors:
        raise MalformedTable("product needs at least one factor; use terminal()")
    return wide_pullback([to_terminal(X) for X in factors])


def subaction(Y: GAction, keep: Sequence) -> tuple[GAction, GMap]:
    """Sub-action on per-object position sets ``keep[x]`` (must be stable)."""
    G = Y.group
    kept = [sorted(k) for k in keep]
    pos = [{i: n for n, i in enumerate(k)} for k in kept]
    carrier = tuple(tuple(Y.carrier[x][i] for i in k) for x, k in enumerate(kept))
    act = []
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        try:
            act.append(tuple(pos[b][Y.act[f][i]] for i in kept[a]))
        except KeyError:
            raise LawViolation("stable subset", f) from None
    Z = GAction(G, carrier, tuple(act))
    return Z, GMap(Z, Y, tuple(tuple(k) for k in kept))


def equalizer(u: GMap, v: GMap) -> tuple[GAction, GMap]:
    X = u.source
    keep = [
        [i for i in range(X.size(x)) if u.components[x][i] == v.components[x][i]]
        for x in X.group.objects()
    ]
    return subaction(X, keep)


def finite_limit(kind: str, *args):
    """Dispatch for ``terminal``, ``product``, ``pullback``, ``equalizer``."""
    if kind == "terminal":
        return terminal(args[0]), []
    if kind == "product":
        return product(*args)
    if kind == "pullback":
        P, p1, p2 = pullback(*args)
        return P, [p1, p2]
    if kind == "equalizer":
        E, e = equalizer(*args)
        return E, [e]
    raise ValueError(f"unknown limit kind {kind!r}")


# ------------------------------------------------------------- colimits


def coproduct(parts: Sequence[GAction], G: FiniteGroupoid | None = None) -> tuple[GAction, list[GMap]]:
    if G is None:
        if not parts:
            raise MalformedTable("empty coproduct needs the groupoid; use initial()")
        G = parts[0].group
    offsets = []
    carrier = []
    for x in G.objects():
        off = []
        labels = []
        for k, X in enumerate(parts):
            off.append(len(labels))
            labels += [(k, l) for l in X.carrier[x]]
        offsets.append(off)
        carrier.append(tuple(labels))
    act = []
    for f in G.morphisms():
        b = G.dst[f]
        row = []
        for k, X in enumerate(parts):
            row += [offsets[b][k] + v for v in X.act[f]]
        act.append(tuple(row))
    C = GAction(G, tuple(carrier), tuple(act))
    injections = [
        GMap(X, C, tuple(tuple(offsets[x][k] + i for i in range(X.size(x))) for x in G.objects()))
        for k, X in enumerate(parts)
    ]
    return C, injections


def copair(C_inj: Sequence[GMap], legs: Sequence[GMap]) -> GMap:
    """Map out of a coproduct determined by its legs."""
    C = C_inj[0].target
    comps = [[None] * C.size(x) for x in C.group.objects()]
    for inj, leg in zip(C_inj, legs):
        for x in C.group.objects():
            for i, j in enumerate(inj.components[x]):
                comps[x][j] = leg.components[x][i]
    return GMap(C, legs[0].target, tuple(tuple(c) for c in comps))


def tuple_map(projections: Sequence[GMap], legs: Sequence[GMap]) -> GMap:
    """Map into a wide pullback determined by its legs."""
    P = projections[0].source
    G = P.group
    comps = []
    for x in G.objects():
        lookup = {
            tuple(p.components[x][n] for p in projections): n for n in range(P.size(x))
        }
        W = legs[0].source
        comps.append(tuple(
            lookup[tuple(l.components[x][i] for l in legs)] for i in range(W.size(x))
        ))
    return GMap(legs[0].source, P, tuple(comps))


def coequalizer(u: GMap, v: GMap) -> tuple[GAction, GMap]:
    Y = u.target
    G = Y.group
    parent = {e: e for e in Y.elements()}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for x in G.objects():
        for a, b in zip(u.components[x], v.components[x]):
            ra, rb = find((x, a)), find((x, b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    classes = []
    cls_index = []
    for x in G.objects():
        roots = sorted({find((x, i))[1] for i in range(Y.size(x))})
        classes.append(roots)
        cls_index.append({r: n for n, r in enumerate(roots)})
    carrier = tuple(tuple(Y.carrier[x][r] for r in roots) for x, roots in enumerate(classes))
    act = []
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        act.append(tuple(cls_index[b][find((b, Y.act[f][r]))[1]] for r in classes[a]))
    Q = GAction(G, carrier, tuple(act))
    q = GMap(Y, Q, tuple(
        tuple(cls_index[x][find((x, i))[1]] for i in range(Y.size(x))) for x in G.objects()
    ))
    return Q, q


def finite_colimit(kind: str, *args):
    """Dispatch for ``initial``, ``coproduct``, ``coequalizer``."""
    if kind == "initial":
        return initial(args[0]), []
    if kind == "coproduct":
        return coproduct(list(args))
    if kind == "coequalizer":
        Q, q = coequalizer(*args)
        return Q, [q]
    raise ValueError(f"unknown colimit kind {kind!r}")


# -------------------------------------------------------- factorization


@dataclass
class FactorizationResult:
    """``u = mono ∘ epi``; ``iso`` identifies ``image ⊔ complement`` with the target."""

    epi: GMap
    mono: GMap
    complement: GAction
    iso: GMap
    complement_inclusion: GMap

    @property
    def image(self) -> GAction:
        return self.epi.target


def epi_mono_factorize(u: GMap) -> FactorizationResult:
    Y = u.target
    G = Y.group
    hit = [set(c) for c in u.components]
    image, mono = subaction(Y, hit)
    comp, comp_incl = subaction(Y, [set(range(Y.size(x))) - hit[x] for x in G.objects()])
    pos = [{i: n for n, i in enumerate(c)} for c in mono.components]
    epi = GMap(u.source, image, tuple(
        tuple(pos[x][v] for v in c) for x, c in enumerate(u.components)
    ))
    _, injections = coproduct([image, comp], G)
    iso = copair(injections, [mono, comp_incl])
    return FactorizationResult(epi, mono, comp, iso, comp_incl)


# ------------------------------------------------------------- orbits


def action_groupoid(X: GAction) -> tuple[FiniteGroupoid, Functor]:
    """Groupoid of elements of ``X`` together with its projection to the acting groupoid."""
    G = X.group
    obj_id = {}
    obj_labels = []
    for x, i in X.elements():
        obj_id[(x, i)] = len(obj_labels)
        obj_labels.append((x, X.carrier[x][i]))
    mor_id = {}
    src, dst, mor_labels, proj = [], [], [], []
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        for i in range(X.size(a)):
            mor_id[(f, i)] = len(src)
            src.append(obj_id[(a, i)])
            dst.append(obj_id[(b, X.act[f][i])])
            mor_labels.append((f, X.carrier[a][i]))
            proj.append(f)
    identity = [mor_id[(G.identity[x], i)] for x, i in X.elements()]
    table = {}
    inverse = []
    for f in G.morphisms():
        a = G.src[f]
        for i in range(X.size(a)):
            j = X.act[f][i]
            inverse.append(mor_id[(G.inverse[f], j)])
            for g in G.out_of(G.dst[f]):
                table[(mor_id[(g, j)], mor_id[(f, i)])] = mor_id[(G.compose(g, f), i)]
    AG = FiniteGroupoid(
        src, dst, identity, table, obj_labels, mor_labels, inverse=inverse,
        name=f"action groupoid of {X.describe()}", check=False,
    )
    P = Functor(AG, G, [x for x, _ in X.elements()], proj)
    return AG, P


def element_index(X: GAction) -> dict:
    """``(x, i) -> object id`` of the action groupoid."""
    return {e: n for n, e in enumerate(X.elements())}


def orbits(X: GAction) -> list[list]:
    """Orbits as sorted lists of ``(x, i)``; edges are followed both ways."""
    G = X.group
    parent = {e: e for e in X.elements()}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        for i, j in enumerate(X.act[f]):
            ra, rb = find((a, i)), find((b, j))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    for e in X.elements():
        groups.setdefault(find(e), []).append(e)
    return [sorted(v) for _, v in sorted(groups.items())]


def is_connected(X: GAction) -> bool:
    return len(orbits(X)) == 1


def orbit_decomposition(X: GAction) -> tuple[list[GAction], GMap]:
    """Connected summands and the iso ``coproduct(summands) -> X``."""
    G = X.group
    parts, incls = [], []
    for orbit in orbits(X):
        keep = [[i for (y, i) in orbit if y == x] for x in G.objects()]
        Z, incl = subaction(X, keep)
        parts.append(Z)
        incls.append(incl)
    _, injections = coproduct(parts, G)
    if not parts:
        return [], GMap(initial(G), X, tuple(() for _ in G.objects()))
    return parts, copair(injections, incls)


# ------------------------------------------------------ maps and isos


def enumerate_gmaps(
    X: GAction, Y: GAction, budget: Budget | int | None = None, isos_only: bool = False,
    shuffle: random.Random | None = None,
):
    """Yield every equivariant map ``X -> Y`` (only bijections with ``isos_only``)."""
    G = X.group
    if isos_only and any(X.size(x) != Y.size(x) for x in G.objects()):
        return
    nodes = list(X.elements())
    edges: dict = {}
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        if G.identity and f == G.identity[a]:
            continue
        table = Y.act[f]
        for i in range(X.size(a)):
            edges.setdefault((a, i), []).append(((b, X.act[f][i]), table.__getitem__))

    def domain(node):
        opts = list(range(Y.size(node[0])))
        if shuffle is not None:
            shuffle.shuffle(opts)
        return opts

    key = (lambda node: node[0]) if isos_only else None
    for val in propagate_assignments(nodes, domain, edges, key, budget):
        yield GMap(X, Y, tuple(
            tuple(val[(x, i)] for i in range(X.size(x))) for x in G.objects()
        ))


def find_iso(X: GAction, Y: GAction, budget=None) -> GMap | None:
    return next(enumerate_gmaps(X, Y, budget, isos_only=True), None)


def are_isomorphic(X: GAction, Y: GAction, budget=None) -> bool:
    return find_iso(X, Y, budget) is not None


def random_gmap(X: GAction, Y: GAction, rng: random.Random, budget=None) -> GMap | None:
    """A uniformly-shuffled first solution; ``None`` if there is no map."""
    return next(enumerate_gmaps(X, Y, budget, shuffle=rng), None)


def restrict(X: GAction, F: Functor) -> GAction:
    """Precompose ``X`` with ``F: K -> G``."""
    K = F.source
    return GAction(
        K,
        tuple(X.carrier[F.omap[k]] for k in K.objects()),
        tuple(X.act[F.mmap[f]] for f in K.morphisms()),
    )


def restrict_map(u: GMap, F: Functor) -> GMap:
    return GMap(
        restrict(u.source, F), restrict(u.target, F),
        tuple(u.components[F.omap[k]] for k in F.source.objects()),
    )


# -------------------------------------------- classification of actions


@dataclass(frozen=True)
class TransitiveType:
    """Iso class of a connected action: component index plus a vertex subgroup rep."""

    component: int
    subgroup: frozenset  # morphism ids in Aut(base)
    size: int


def transitive_types(G: FiniteGroupoid) -> list[TransitiveType]:
    out = []
    for c_idx, comp in enumerate(connected_components(G)):
        for H in subgroup_classes(comp.vertex_group):
            morphs = frozenset(comp.vertex_elements[h] for h in H)
            size = len(comp.objects) * comp.order // len(H)
            out.append(TransitiveType(c_idx, morphs, size))
    return out


def transitive_action(G: FiniteGroupoid, t: TransitiveType) -> GAction:
    """``Hom(base, -) / H`` for the type's component and subgroup."""
    comp = connected_components(G)[t.component]
    H = sorted(t.subgroup)
    cosets = []
    where = []
    for x in G.objects():
        seen: dict = {}
        reps = []
        if x in comp.paths:
            for f in G.hom(comp.base, x):
                key = min(G.compose(f, h) for h in H)
                if key not in seen:
                    seen[key] = len(reps)
                    reps.append(key)
        cosets.append(reps)
        where.append(seen)
    act = []
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        act.append(tuple(
            where[b][min(G.compose(G.compose(f, r), h) for h in H)] for r in cosets[a]
        ))
    return GAction(G, tuple(tuple(G.mor_labels[r] for r in reps) for reps in cosets), tuple(act))


def action_from_types(G: FiniteGroupoid, types: Sequence[TransitiveType]) -> GAction:
    if not types:
        return initial(G)
    C, _ = coproduct([transitive_action(G, t) for t in types], G)
    return C


def classify_action(X: GAction) -> tuple:
    """Sorted multiset of transitive types, a complete iso invariant."""
    G = X.group
    types = transitive_types(G)
    parts, _ = orbit_decomposition(X)
    found = []
    for P in parts:
        for n, t in enumerate(types):
            if t.size == P.total_size and are_isomorphic(P, transitive_action(G, t)):
                found.append(n)
                break
        else:
            raise LawViolation("classification", P.describe(), "orbit matches no transitive type")
    return tuple(sorted(found))


def actions_up_to_size(
    G: FiniteGroupoid, n: int, max_fiber: int | None = None, components=None,
) -> list[GAction]:
    """One action per iso class with total carrier size at most ``n``.

    ``max_fiber`` caps the carrier size at every object; ``components``
    restricts the support to the given component indices.
    """
    comps = connected_components(G)
    types = [
        t for t in transitive_types(G)
        if components is None or t.component in components
    ]
    fiber = [t.size // len(comps[t.component].objects) for t in types]
    out = []

    def rec(start, remaining, chosen, load):
        out.append(action_from_types(G, [types[k] for k in chosen]))
        for k in range(start, len(types)):
            c = types[k].component
            if types[k].size > remaining:
                continue
            if max_fiber is not None and load.get(c, 0) + fiber[k] > max_fiber:
                continue
            rec(k, remaining - types[k].size, chosen + [k], {**load, c: load.get(c, 0) + fiber[k]})

    rec(0, n, [], {})
    return out


class ActionCategory:
    """Protocol category on a list of actions with all equivariant maps."""

    def __init__(self, actions: Sequence[GAction], budget=None):
        self.actions = list(actions)
        self.budget = as_budget(budget)
        self._hom: dict = {}

    def objects(self):
        return self.actions

    def hom(self, X, Y):
        key = (X, Y)
        if key not in self._hom:
            self._hom[key] = list(enumerate_gmaps(X, Y, self.budget))
        return self._hom[key]

    def compose(self, g, f):
        return compose_maps(g, f)

    def ident(self, X):
        return identity_map(X)


def action_fragment_category(G: FiniteGroupoid, n: int, budget=None) -> FiniteCategory:
    """Explicit category of iso-class representatives of size at most ``n``."""
    return materialize(ActionCategory(actions_up_to_size(G, n), budget), name=f"actions<= {n}")


# ----------------------------------------------------------------- slices


@dataclass
class SliceFragment:
    base: GAction
    bound: int
    objects: list  # GMaps with target ``base``
    morphisms: dict  # (i, j) -> list of GMaps over the base

    def category(self) -> FiniteCategory:
        objs = list(range(len(self.objects)))
        outer = self

        class _Slice:
            def objects(self):
                return objs

            def hom(self, i, j):
                return outer.morphisms[(i, j)]

            def compose(self, g, f):
                return compose_maps(g, f)

            def ident(self, i):
                return identity_map(outer.objects[i].source)

        return materialize(_Slice(), name=f"slice over {self.base.describe()}")


def maps_over(p: GMap, q: GMap, budget=None) -> list[GMap]:
    """Maps ``u`` with ``q ∘ u = p``."""
    return [u for u in enumerate_gmaps(p.source, q.source, budget)
            if compose_maps(q, u).components == p.components]


def iso_over(p: GMap, q: GMap, budget=None) -> GMap | None:
    for u in enumerate_gmaps(p.source, q.source, budget, isos_only=True):
        if compose_maps(q, u).components == p.components:
            return u
    return None


def slice_fragment(S: GAction, n: int, budget=None) -> SliceFragment:
    """All ``E -> S`` with ``|E| <= n`` up to iso over ``S``, with every triangle."""
    budget = as_budget(budget)
    objects: list[GMap] = []
    for E in actions_up_to_size(S.group, n):
        found: list[GMap] = []
        for p in enumerate_gmaps(E, S, budget):
            if all(iso_over(p, q, budget) is None for q in found):
                found.append(p)
        objects += found
    morphisms = {
        (i, j): maps_over(p, q, budget)
        for i, p in enumerate(objects) for j, q in enumerate(objects)
    }
    return SliceFragment(S, n, objects, morphisms)


def fiber_action(p: GMap, AG: FiniteGroupoid | None = None) -> GAction:
    """The action of the groupoid of elements of ``S`` on the fibers of ``p: E -> S``.

    Pass ``AG`` (from :func:`action_groupoid` of the base) to share one instance.
    """
    E, S = p.source, p.target
    if AG is None:
        AG, _ = action_groupoid(S)
    idx = element_index(S)
    fibers = [None] * AG.n_objects
    pos = {}
    for (x, s), k in idx.items():
        members = [i for i in range(E.size(x)) if p.components[x][i] == s]
        fibers[k] = members
        for n, i in enumerate(members):
            pos[(x, i)] = n
    G = S.group
    act = []
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        for s in range(S.size(a)):
            act.append(tuple(pos[(b, E.act[f][i])] for i in fibers[idx[(a, s)]]))
    carrier = []
    for (x, s), k in sorted(idx.items(), key=lambda kv: kv[1]):
        carrier.append(tuple(E.carrier[x][i] for i in fibers[k]))
    return GAction(AG, tuple(carrier), tuple(act))


def fiber_map(u: GMap, p: GMap, q: GMap, AG: FiniteGroupoid) -> GMap:
    """Restriction of a map over ``S`` to fibers."""
    S = p.target
    X, Y = fiber_action(p, AG), fiber_action(q, AG)
    idx = element_index(S)
    comps = [None] * AG.n_objects
    for (x, s), k in idx.items():
        src = [i for i in range(p.source.size(x)) if p.components[x][i] == s]
        dst = {i: n for n, i in enumerate(
            i for i in range(q.source.size(x)) if q.components[x][i] == s)}
        comps[k] = tuple(dst[u.components[x][i]] for i in src)
    return GMap(X, Y, tuple(comps))


def total_space(S: GAction, Y: GAction) -> GMap:
    """Inverse construction: an action of the groupoid of elements gives ``E -> S``."""
    G = S.group
    idx = element_index(S)
    AG = Y.group
    pairs = []
    where = []
    for x in G.objects():
        ps = [(s, e) for s in range(S.size(x)) for e in range(Y.size(idx[(x, s)]))]
        pairs.append(ps)
        where.append({pe: n for n, pe in enumerate(ps)})
    mor = {}
    for m, (f, _) in enumerate(AG.mor_labels):
        mor[(f, AG.src[m])] = m
    act = []
    for f in G.morphisms():
        a, b = G.src[f], G.dst[f]
        row = []
        for s, e in pairs[a]:
            m = mor[(f, idx[(a, s)])]
            row.append(where[b][(S.act[f][s], Y.act[m][e])])
        act.append(tuple(row))
    carrier = tuple(
        tuple((S.carrier[x][s], Y.carrier[idx[(x, s)]][e]) for s, e in ps)
        for x, ps in enumerate(pairs)
    )
    E = GAction(G, carrier, tuple(act))
    return GMap(E, S, tuple(tuple(s for s, _ in ps) for ps in pairs))


@dataclass
class SliceEquivalence:
    """Outcome of comparing a slice fragment with actions of the groupoid of elements."""

    witness: EquivalenceWitness | Refutation
    round_trip_ok: bool
    fragment_size: int

    def __bool__(self) -> bool:
        return bool(self.witness) and self.round_trip_ok


def slice_action_equivalence(S: GAction, n: int, budget=None) -> SliceEquivalence:
    budget = as_budget(budget)
    sf = slice_fragment(S, n, budget)
    slice_cat = sf.category()
    AG, _ = action_groupoid(S)
    target_objs = actions_up_to_size(AG, n)
    target_cat = materialize(ActionCategory(target_objs, budget), name="fiber actions")
    # send each slice object to the representative of its fiber action
    chosen = []
    for p in sf.objects:
        F = fiber_action(p, AG)
        for k, T in enumerate(target_objs):
            iso = find_iso(F, T, budget)
            if iso is not None:
                chosen.append((k, iso))
                break
        else:
            raise BudgetExceeded("fiber action exceeds the fragment bound")
    mor_index = {}
    for m in range(target_cat.n_morphisms):
        mor_index[(target_cat.src[m], target_cat.dst[m], target_cat.mor_labels[m].components)] = m
    mmap = []
    for m in range(slice_cat.n_morphisms):
        i, j = slice_cat.src[m], slice_cat.dst[m]
        u = slice_cat.mor_labels[m]
        fu = fiber_map(u, sf.objects[i], sf.objects[j], AG)
        (ki, isoi), (kj, isoj) = chosen[i], chosen[j]
        moved = compose_maps(isoj, compose_maps(fu, inverse_map(isoi)))
        mmap.append(mor_index[(ki, kj, moved.components)])
    F = Functor(slice_cat, target_cat, [k for k, _ in chosen], mmap, check=True)
    witness = decide_equivalence(F, budget)
    round_trip = all(
        iso_over(total_space(S, fiber_action(p, AG)), p, budget) is not None
        for p in sf.objects
    )
    return SliceEquivalence(witness, round_trip, len(sf.objects))


def enumerate_labeled_actions(K: FiniteGroupoid, max_size: int, budget=None):
    """Every action of ``K`` whose carriers are ``range(n)`` with ``n <= max_size``."""
    from .fincat import functor_tables

    perms = {n: list(itertools.permutations(range(n))) for n in range(max_size + 1)}
    for omap, mmap in functor_tables(
        K,
        range(max_size + 1),
        lambda a, b: perms[a] if a == b else (),
        lambda g, f: tuple(g[i] for i in f),
        lambda n: tuple(range(n)),
        budget,
    ):
        yield GAction(K, tuple(tuple(range(n)) for n in omap), mmap)
