"""Finite categories, groupoids, functors, natural transformations, equivalences.

Explicit categories use dense integer ids for objects and morphisms and a
composition dictionary keyed by ``(g, f)`` meaning ``g after f``.  Lazy
categories (functor categories, descent categories) only need to provide the
small protocol ``objects() / hom(a, b) / compose(g, f) / ident(a)``; every
algorithm here that says "category" accepts either.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

from .errors import LawViolation, MalformedTable, UnknownPreset
from .groups import Group, find_isomorphism, preset_group
from .search import Budget, Constraint, as_budget, solve


class FiniteCategory:
    """Explicit finite category given by total tables over dense ids."""

    def __init__(
        self,
        src: Sequence[int],
        dst: Sequence[int],
        identity: Sequence[int],
        compose: dict,
        obj_labels: Sequence | None = None,
        mor_labels: Sequence | None = None,
        name: str = "",
        check: bool = True,
    ):
        self.src = tuple(src)
        self.dst = tuple(dst)
        self.identity = tuple(identity)
        self.table = dict(compose)
        self.name = name
        n_obj = len(self.identity)
        self.obj_labels = tuple(obj_labels) if obj_labels is not None else tuple(range(n_obj))
        self.mor_labels = (
            tuple(mor_labels) if mor_labels is not None else tuple(range(len(self.src)))
        )
        self._hom: dict = {}
        for f, (a, b) in enumerate(zip(self.src, self.dst)):
            self._hom.setdefault((a, b), []).append(f)
        self._hom = {k: tuple(v) for k, v in self._hom.items()}
        self._out: dict = {}
        for f, a in enumerate(self.src):
            self._out.setdefault(a, []).append(f)
        if check:
            self.check_laws()

    @property
    def n_objects(self) -> int:
        return len(self.identity)

    @property
    def n_morphisms(self) -> int:
        return len(self.src)

    def objects(self) -> list:
        return list(range(self.n_objects))

    def morphisms(self) -> range:
        return range(self.n_morphisms)

    def hom(self, a: int, b: int) -> tuple:
        return self._hom.get((a, b), ())

    def ident(self, a: int) -> int:
        return self.identity[a]

    def compose(self, g: int, f: int) -> int:
        try:
            return self.table[(g, f)]
        except KeyError:
            raise LawViolation("composition", (g, f), f"missing composite {g}∘{f}") from None

    def out_of(self, a: int) -> list:
        return self._out.get(a, [])

    def composable_pairs(self) -> Iterable[tuple]:
        for (a, b), fs in self._hom.items():
            for c in range(self.n_objects):
                for g in self.hom(b, c):
                    for f in fs:
                        yield g, f

    def check_laws(self) -> None:
        n_obj, n_mor = self.n_objects, self.n_morphisms
        if len(self.dst) != n_mor:
            raise MalformedTable("src and dst tables differ in length")
        for f in range(n_mor):
            if not (0 <= self.src[f] < n_obj and 0 <= self.dst[f] < n_obj):
                raise MalformedTable(f"morphism {f} has dangling endpoint")
        for a, i in enumerate(self.identity):
            if not (0 <= i < n_mor) or self.src[i] != a or self.dst[i] != a:
                raise MalformedTable(f"identity of object {a} is not an endomorphism of it")
        for (g, f), h in self.table.items():
            if not all(0 <= x < n_mor for x in (g, f, h)):
                raise MalformedTable(f"composition entry {(g, f, h)} has dangling ids")
            if self.dst[f] != self.src[g]:
                raise LawViolation("composition", (g, f), f"{g}∘{f} listed but not composable")
            if self.src[h] != self.src[f] or self.dst[h] != self.dst[g]:
                raise LawViolation("composition", (g, f, h), "composite has wrong endpoints")
        for g, f in self.composable_pairs():
            if (g, f) not in self.table:
                raise LawViolation("composition", (g, f), f"missing composite {g}∘{f}")
        for f in range(n_mor):
            if self.table[(self.identity[self.dst[f]], f)] != f:
                raise LawViolation("identity law", (self.identity[self.dst[f]], f))
            if self.table[(f, self.identity[self.src[f]])] != f:
                raise LawViolation("identity law", (f, self.identity[self.src[f]]))
        for g, f in self.composable_pairs():
            gf = self.table[(g, f)]
            for h in self.out_of(self.dst[g]):
                if self.table[(h, gf)] != self.table[(self.table[(h, g)], f)]:
                    raise LawViolation("associativity", (h, g, f))

    def inverse_of(self, f: int) -> int | None:
        a, b = self.src[f], self.dst[f]
        for g in self.hom(b, a):
            if self.table[(g, f)] == self.identity[a] and self.table[(f, g)] == self.identity[b]:
                return g
        return None

    def __repr__(self) -> str:
        name = f" {self.name}" if self.name else ""
        return f"<FiniteCategory{name}: {self.n_objects} objects, {self.n_morphisms} morphisms>"


class FiniteGroupoid(FiniteCategory):
    """Finite category in which every morphism has a recorded inverse."""

    def __init__(self, *args, inverse: Sequence[int] | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        if inverse is None:
            inverse = []
            for f in self.morphisms():
                g = self.inverse_of(f)
                if g is None:
                    raise LawViolation(
                        "identity law",
                        f,
                        f"identity law fails for inverses: morphism {self.mor_labels[f]!r} "
                        "has no g with g∘f = id and f∘g = id",
                    )
                inverse.append(g)
        self.inverse = tuple(inverse)

    def inv(self, f: int) -> int:
        return self.inverse[f]

    def check_laws(self) -> None:
        super().check_laws()
        if hasattr(self, "inverse"):
            for f in self.morphisms():
                g = self.inverse[f]
                if self.table[(g, f)] != self.identity[self.src[f]]:
                    raise LawViolation("inverse", f)


def as_groupoid(cat: FiniteCategory) -> FiniteGroupoid:
    """Promote a validated category to a groupoid, or raise LawViolation."""
    if isinstance(cat, FiniteGroupoid):
        return cat
    return FiniteGroupoid(
        cat.src, cat.dst, cat.identity, cat.table, cat.obj_labels, cat.mor_labels,
        name=cat.name, check=False,
    )


def validate_category(raw: dict) -> FiniteCategory:
    """Build a category from a JSON-style description.

    ``raw`` carries ``objects`` (count or dense id list), ``morphisms`` as
    ``[id, src, dst]`` triples, ``identity`` (list or object-keyed map) and
    ``compose`` as ``[g, f, gf]`` triples.
    """
    try:
        objects = raw["objects"]
        morphisms = raw["morphisms"]
        identity = raw["identity"]
        compose = raw["compose"]
    except (KeyError, TypeError) as exc:
        raise MalformedTable(f"category description missing field {exc}") from None
    n_obj = objects if isinstance(objects, int) else len(objects)
    if not isinstance(objects, int) and sorted(objects) != list(range(n_obj)):
        raise MalformedTable("object ids must be 0..n-1")
    ids = [m[0] for m in morphisms]
    if sorted(ids) != list(range(len(ids))):
        raise MalformedTable("morphism ids must be 0..m-1")
    src = [0] * len(ids)
    dst = [0] * len(ids)
    for mid, a, b in morphisms:
        src[mid], dst[mid] = a, b
    if isinstance(identity, dict):
        identity = [identity[str(a)] if str(a) in identity else identity[a] for a in range(n_obj)]
    if len(identity) != n_obj:
        raise MalformedTable("one identity per object required")
    table = {}
    for entry in compose:
        g, f, h = entry
        if (g, f) in table and table[(g, f)] != h:
            raise LawViolation("composition", (g, f), "composite listed twice with different values")
        table[(g, f)] = h
    labels = raw.get("labels")
    return FiniteCategory(src, dst, identity, table, mor_labels=labels, name=raw.get("name", ""))


# ---------------------------------------------------------------- constructors


def terminal_category() -> FiniteGroupoid:
    return FiniteGroupoid([0], [0], [0], {(0, 0): 0}, name="terminal")


def discrete_groupoid(n: int, name: str = "") -> FiniteGroupoid:
    return FiniteGroupoid(
        range(n), range(n), range(n), {(i, i): i for i in range(n)},
        name=name or f"discrete-{n}",
    )


def groupoid_from_group(G: Group, name: str = "") -> FiniteGroupoid:
    """The one-object groupoid B G."""
    n = G.order
    table = {(g, f): G.mul[g][f] for g in range(n) for f in range(n)}
    return FiniteGroupoid(
        [0] * n, [0] * n, [0], table, mor_labels=G.labels or None,
        inverse=[G.inv(g) for g in range(n)], name=name or f"B(order {n})", check=False,
    )


def coproduct_groupoid(parts: Sequence[FiniteGroupoid], name: str = "") -> FiniteGroupoid:
    src, dst, ident, inverse, table = [], [], [], [], {}
    obj_labels, mor_labels = [], []
    o_off = m_off = 0
    for k, P in enumerate(parts):
        src += [o_off + a for a in P.src]
        dst += [o_off + b for b in P.dst]
        ident += [m_off + i for i in P.identity]
        inverse += [m_off + i for i in P.inverse]
        table.update({(m_off + g, m_off + f): m_off + h for (g, f), h in P.table.items()})
        obj_labels += [(k, x) for x in P.obj_labels]
        mor_labels += [(k, x) for x in P.mor_labels]
        o_off += P.n_objects
        m_off += P.n_morphisms
    return FiniteGroupoid(
        src, dst, ident, table, obj_labels, mor_labels, inverse=inverse,
        name=name or " ⊔ ".join(P.name for P in parts), check=False,
    )


def preset_groupoid(name: str) -> FiniteGroupoid:
    """``"C2"``, ``"S3"``, ... give B G; ``"C2+C3"`` gives a coproduct; ``"discrete-3"``."""
    if "+" in name:
        return coproduct_groupoid([preset_groupoid(p) for p in name.split("+")], name=name)
    if name == "terminal":
        return terminal_category()
    if name.startswith("discrete-"):
        count = name.split("-", 1)[1]
        if not count.isdigit():
            raise UnknownPreset(f"unknown preset groupoid {name!r}")
        return discrete_groupoid(int(count))
    return groupoid_from_group(preset_group(name), name=f"B{name}")


# ----------------------------------------------------------- functors & nat


class Functor:
    """Functor between explicit categories given by object and morphism tables."""

    def __init__(self, source: FiniteCategory, target: FiniteCategory, omap, mmap, check=False):
        self.source = source
        self.target = target
        self.omap = tuple(omap)
        self.mmap = tuple(mmap)
        if check:
            self.check_laws()

    def fobj(self, a):
        return self.omap[a]

    def fmor(self, f):
        return self.mmap[f]

    # descent code treats functors into a target uniformly through obj/mor
    obj = fobj
    mor = fmor

    def check_laws(self) -> None:
        C, D = self.source, self.target
        if len(self.omap) != C.n_objects or len(self.mmap) != C.n_morphisms:
            raise MalformedTable("functor tables have wrong length")
        for f in C.morphisms():
            img = self.mmap[f]
            if D.src[img] != self.omap[C.src[f]] or D.dst[img] != self.omap[C.dst[f]]:
                raise LawViolation("functor endpoints", f)
        for a in C.objects():
            if self.mmap[C.identity[a]] != D.identity[self.omap[a]]:
                raise LawViolation("functor identity", a)
        for (g, f), h in C.table.items():
            if D.compose(self.mmap[g], self.mmap[f]) != self.mmap[h]:
                raise LawViolation("functor composition", (g, f))

    def __eq__(self, other):
        return (
            isinstance(other, Functor)
            and self.source is other.source
            and self.target is other.target
            and self.omap == other.omap
            and self.mmap == other.mmap
        )

    def __hash__(self):
        return hash((self.omap, self.mmap))

    def __repr__(self):
        return f"Functor(omap={self.omap}, mmap={self.mmap})"


class LazyFunctor:
    """Functor between protocol categories given by two callables."""

    def __init__(self, source, target, fobj: Callable, fmor: Callable):
        self.source = source
        self.target = target
        self._fobj = fobj
        self._fmor = fmor

    def fobj(self, a):
        return self._fobj(a)

    def fmor(self, f):
        return self._fmor(f)


def compose_functors(G: Functor, F: Functor) -> Functor:
    """``G after F``."""
    return Functor(
        F.source, G.target,
        [G.omap[x] for x in F.omap], [G.mmap[f] for f in F.mmap],
    )


def identity_functor(C: FiniteCategory) -> Functor:
    return Functor(C, C, range(C.n_objects), range(C.n_morphisms))


class NatTransform:
    """Natural transformation ``F => G`` with one target morphism per source object."""

    def __init__(self, source: Functor, target: Functor, components):
        self.source = source
        self.target = target
        self.components = tuple(components)

    def check_naturality(self) -> None:
        F, G = self.source, self.target
        C, D = F.source, F.target
        for f in C.morphisms():
            a, b = C.src[f], C.dst[f]
            lhs = D.compose(self.components[b], F.mmap[f])
            rhs = D.compose(G.mmap[f], self.components[a])
            if lhs != rhs:
                raise LawViolation("naturality", f)

    def is_iso(self) -> bool:
        D = self.source.target
        return all(D.inverse_of(c) is not None for c in self.components)

    def __eq__(self, other):
        return (
            isinstance(other, NatTransform)
            and self.source == other.source
            and self.target == other.target
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.source, self.target, self.components))

    def __repr__(self):
        return f"NatTransform({self.components})"


def vertical_compose(beta: NatTransform, alpha: NatTransform) -> NatTransform:
    D = alpha.source.target
    return NatTransform(
        alpha.source, beta.target,
        [D.compose(b, a) for b, a in zip(beta.components, alpha.components)],
    )


def identity_transform(F: Functor) -> NatTransform:
    D = F.target
    return NatTransform(F, F, [D.identity[x] for x in F.omap])


def functor_tables(
    C: FiniteCategory,
    objects: Sequence,
    hom: Callable,
    compose: Callable,
    ident: Callable,
    budget: Budget | int | None = None,
    choices: Sequence | None = None,
):
    """Yield ``(omap, mmap)`` for every functor from ``C`` into a protocol target.

    Object maps are tried exhaustively (``choices[a]`` narrows the images of
    object ``a``); morphism images are chosen one free morphism at a time and
    every composite they force is propagated at once.
    """
    budget = as_budget(budget)
    identities = set(C.identity)
    free = [f for f in C.morphisms() if f not in identities]
    after: dict = {f: [] for f in C.morphisms()}  # f -> [(g, g∘f)]
    before: dict = {f: [] for f in C.morphisms()}  # f -> [(h, f∘h)]
    for (g, f), h in C.table.items():
        after[f].append((g, h))
        before[g].append((f, h))
    if choices is None:
        choices = [list(objects)] * C.n_objects
    for omap in itertools.product(*choices):
        budget.tick()
        mmap: list = [None] * C.n_morphisms
        for a in C.objects():
            mmap[C.identity[a]] = ident(omap[a])

        def assign(f0, v0, trail):
            stack = [(f0, v0)]
            while stack:
                f, v = stack.pop()
                budget.tick()
                if mmap[f] is not None:
                    if mmap[f] != v:
                        return False
                    continue
                mmap[f] = v
                trail.append(f)
                for g, gf in after[f]:
                    if mmap[g] is not None:
                        stack.append((gf, compose(mmap[g], v)))
                for h, fh in before[f]:
                    if mmap[h] is not None:
                        stack.append((fh, compose(v, mmap[h])))
            return True

        found = []

        def rec(idx):
            while idx < len(free) and mmap[free[idx]] is not None:
                idx += 1
            if idx == len(free):
                found.append(tuple(mmap))
                return
            f = free[idx]
            for v in hom(omap[C.src[f]], omap[C.dst[f]]):
                trail: list = []
                if assign(f, v, trail):
                    rec(idx + 1)
                for u in trail:
                    mmap[u] = None

        rec(0)
        for mm in found:
            yield tuple(omap), mm


def enumerate_functors(
    C: FiniteCategory, D: FiniteCategory, budget: Budget | int | None = None,
    choices: Sequence | None = None,
) -> list[Functor]:
    """Every functor ``C -> D``: object maps first, then morphism maps by propagation."""
    return [
        Functor(C, D, omap, mmap)
        for omap, mmap in functor_tables(
            C, D.objects(), D.hom, D.compose, D.ident, budget, choices
        )
    ]


def enumerate_natural_transformations(
    F: Functor, G: Functor, budget: Budget | int | None = None
) -> list[NatTransform]:
    C, D = F.source, F.target
    grpd = isinstance(D, FiniteGroupoid)
    domains = {a: D.hom(F.omap[a], G.omap[a]) for a in C.objects()}
    constraints = []
    for f in C.morphisms():
        if f in C.identity:
            continue
        a, b = C.src[f], C.dst[f]
        Ff, Gf = F.mmap[f], G.mmap[f]

        def check(asg, a=a, b=b, Ff=Ff, Gf=Gf):
            return D.compose(asg[b], Ff) == D.compose(Gf, asg[a])

        infer = None
        if grpd and a != b:
            def infer(asg, var, a=a, b=b, Ff=Ff, Gf=Gf):
                if var == b:
                    return D.compose(D.compose(Gf, asg[a]), D.inv(Ff))
                return D.compose(D.compose(D.inv(Gf), asg[b]), Ff)

        constraints.append(Constraint(tuple(dict.fromkeys((a, b))), check, infer))
    out = []
    for asg in solve(C.objects(), domains, constraints, budget):
        out.append(NatTransform(F, G, [asg[a] for a in C.objects()]))
    return out


class FunctorCategory:
    """Lazy ``Hom(C, D)``: objects are functors, morphisms natural transformations."""

    def __init__(self, C: FiniteCategory, D: FiniteCategory, budget: Budget | int | None = None):
        self.C = C
        self.D = D
        self.budget = as_budget(budget)
        self._objects = None
        self._hom: dict = {}

    def objects(self) -> list:
        if self._objects is None:
            self._objects = enumerate_functors(self.C, self.D, self.budget)
        return self._objects

    def hom(self, F, G) -> list:
        key = (F, G)
        if key not in self._hom:
            self._hom[key] = enumerate_natural_transformations(F, G, self.budget)
        return self._hom[key]

    def compose(self, beta, alpha):
        return vertical_compose(beta, alpha)

    def ident(self, F):
        return identity_transform(F)


def materialize(cat, name: str = "", groupoid: bool = False, check: bool = False) -> FiniteCategory:
    """Turn a protocol category into an explicit one (labels keep the original values).

    Composition is read off ``cat.compose``, so the laws hold whenever they
    hold for ``cat``; pass ``check=True`` to re-verify them exhaustively.
    """
    objs = list(cat.objects())
    oid = {x: i for i, x in enumerate(objs)}
    src, dst, labels = [], [], []
    mid: dict = {}
    for a in objs:
        for b in objs:
            for f in cat.hom(a, b):
                mid[(oid[a], oid[b], f)] = len(src)
                src.append(oid[a])
                dst.append(oid[b])
                labels.append(f)
    identity = [mid[(oid[a], oid[a], cat.ident(a))] for a in objs]
    table = {}
    for f in range(len(src)):
        a, b = src[f], dst[f]
        for g in range(len(src)):
            if src[g] != b:
                continue
            c = dst[g]
            table[(g, f)] = mid[(a, c, cat.compose(labels[g], labels[f]))]
    cls = FiniteGroupoid if groupoid else FiniteCategory
    return cls(src, dst, identity, table, objs, labels, name=name, check=check)


def functor_category(C: FiniteCategory, D: FiniteCategory, budget=None) -> FiniteCategory:
    return materialize(FunctorCategory(C, D, budget), name=f"Hom({C.name}, {D.name})", check=True)


# ------------------------------------------------------------- equivalences


@dataclass
class EquivalenceWitness:
    """Certificate that ``forward`` is fully faithful and essentially surjective.

    ``essential[t] = (a, iso)`` with ``iso: F(a) -> t``; ``hom_tables[(a, b)]``
    lists the images of ``hom(a, b)`` in order, a bijection onto
    ``hom(F a, F b)``.
    """

    forward: Any
    essential: dict
    hom_tables: dict

    def __bool__(self) -> bool:
        return True

    def summary(self) -> dict:
        return {
            "verdict": "equivalence",
            "target_objects": len(self.essential),
            "hom_sets_checked": len(self.hom_tables),
        }


@dataclass
class Refutation:
    reason: str
    detail: Any = None

    def __bool__(self) -> bool:
        return False

    def summary(self) -> dict:
        return {"verdict": "refuted", "reason": self.reason, "detail": repr(self.detail)}


def find_iso(cat, a, b):
    """Some isomorphism ``a -> b`` in a protocol category, or None."""
    if hasattr(cat, "find_iso"):
        return cat.find_iso(a, b)
    if isinstance(cat, FiniteGroupoid):
        hs = cat.hom(a, b)
        return hs[0] if hs else None
    back = cat.hom(b, a)
    ia, ib = cat.ident(a), cat.ident(b)
    for f in cat.hom(a, b):
        for g in back:
            if cat.compose(g, f) == ia and cat.compose(f, g) == ib:
                return f
    return None


def decide_equivalence(F, budget: Budget | int | None = None):
    """Return an :class:`EquivalenceWitness` or a :class:`Refutation` for ``F``."""
    budget = as_budget(budget)
    S, T = F.source, F.target
    s_objs = list(S.objects())
    images = {a: F.fobj(a) for a in s_objs}
    tables = {}
    for a in s_objs:
        for b in s_objs:
            hs = list(S.hom(a, b))
            ht = list(T.hom(images[a], images[b]))
            budget.tick(len(hs) + len(ht))
            img = [F.fmor(f) for f in hs]
            if len(set(img)) != len(img):
                return Refutation("not faithful", (a, b))
            if set(img) != set(ht):
                return Refutation("not full", (a, b))
            tables[(a, b)] = tuple(img)
    essential = {}
    for t in T.objects():
        hit = None
        for a in s_objs:
            if images[a] == t:
                hit = (a, T.ident(t))
                break
        if hit is None:
            for a in s_objs:
                budget.tick()
                iso = find_iso(T, images[a], t)
                if iso is not None:
                    hit = (a, iso)
                    break
        if hit is None:
            return Refutation("not essentially surjective", t)
        essential[t] = hit
    return EquivalenceWitness(F, essential, tables)


@dataclass
class Component:
    objects: tuple
    base: int
    paths: dict  # object -> morphism base -> object
    vertex_group: Group
    vertex_elements: tuple  # group element index -> morphism id

    @property
    def order(self) -> int:
        return self.vertex_group.order


def vertex_group(G: FiniteGroupoid, base: int) -> tuple[Group, tuple]:
    elems = [G.identity[base]] + [f for f in G.hom(base, base) if f != G.identity[base]]
    idx = {f: i for i, f in enumerate(elems)}
    mul = tuple(tuple(idx[G.compose(a, b)] for b in elems) for a in elems)
    return Group(mul=mul), tuple(elems)


def connected_components(G: FiniteGroupoid) -> list[Component]:
    comp_of: dict = {}
    comps = []
    for base in G.objects():
        if base in comp_of:
            continue
        paths = {base: G.identity[base]}
        frontier = [base]
        while frontier:
            x = frontier.pop()
            for f in G.out_of(x):
                y = G.dst[f]
                if y not in paths:
                    paths[y] = G.compose(f, paths[x])
                    frontier.append(y)
        for y in paths:
            comp_of[y] = len(comps)
        grp, elems = vertex_group(G, base)
        comps.append(Component(tuple(sorted(paths)), base, paths, grp, elems))
    return comps


def groupoids_equivalent(G: FiniteGroupoid, H: FiniteGroupoid, budget=None):
    """Decide ``G ≃ H``; a witness carries an explicit functor ``G -> H``."""
    cg, ch = connected_components(G), connected_components(H)
    if len(cg) != len(ch):
        return Refutation("component counts differ", (len(cg), len(ch)))
    used: set = set()
    matches = []
    for c in cg:
        for k, d in enumerate(ch):
            if k in used or c.order != d.order:
                continue
            phi = find_isomorphism(c.vertex_group, d.vertex_group)
            if phi is not None:
                used.add(k)
                matches.append((c, d, phi))
                break
        else:
            return Refutation("no component with isomorphic vertex group", c.base)
    omap = [0] * G.n_objects
    mmap = [0] * G.n_morphisms
    for c, d, phi in matches:
        gidx = {f: i for i, f in enumerate(c.vertex_elements)}
        for x in c.objects:
            omap[x] = d.base
        for x in c.objects:
            for y in c.objects:
                for f in G.hom(x, y):
                    loop = G.compose(G.inv(c.paths[y]), G.compose(f, c.paths[x]))
                    mmap[f] = d.vertex_elements[phi[gidx[loop]]]
    F = Functor(G, H, omap, mmap, check=True)
    return decide_equivalence(F, budget)
