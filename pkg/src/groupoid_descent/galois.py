"""Galois categories presented by actions plus fiber functors.

The default model is intensional: objects are actions of a finite groupoid
(or representations of a quiver, which is how descent data appear) and all
finite limits and colimits are computed pointwise by :mod:`gset`.  A fiber
functor only needs ``size(X)`` and ``map(u)``; evaluation at a node and the
constant singleton are provided.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import FragmentNotClosed, NoComponent, NotExact, ReindexFailure
from .fincat import (
    FiniteCategory,
    FiniteGroupoid,
    LazyFunctor,
    connected_components,
    decide_equivalence,
    enumerate_functors,
    enumerate_natural_transformations,
    materialize,
)
from .gset import (
    ActionCategory,
    GAction,
    GMap,
    Quiver,
    actions_up_to_size,
    are_isomorphic,
    compose_maps,
    coequalizer,
    coproduct,
    copair,
    enumerate_gmaps,
    epi_mono_factorize,
    equalizer,
    find_iso,
    identity_map,
    initial,
    is_connected,
    orbit_decomposition,
    product,
    pullback,
    random_gmap,
    terminal,
    to_terminal,
    transitive_action,
    transitive_types,
)
from .search import as_budget, propagate_assignments

# keep sampled test objects small so exhaustive hom-set oracles stay cheap
SAMPLE_SIZE_CAP = 6


# ---------------------------------------------------------------- fibers


@dataclass(frozen=True)
class EvaluationFiber:
    node: int

    @property
    def name(self) -> str:
        return f"eval@{self.node}"

    def size(self, X: GAction) -> int:
        return X.size(self.node)

    def map(self, u: GMap) -> tuple:
        return u.components[self.node]


@dataclass(frozen=True)
class ConstantFiber:
    name: str = "constant-singleton"

    def size(self, X: GAction) -> int:
        return 1

    def map(self, u: GMap) -> tuple:
        return (0,)


# ----------------------------------------------------------------- model


class ActionModel:
    """Actions of ``group`` (a groupoid or a quiver) with a pool of sample objects."""

    def __init__(self, group, pool: Sequence[GAction] | None = None, bound: int = 4):
        self.group = group
        self.bound = bound
        if pool is None:
            if isinstance(group, Quiver):
                raise ValueError("quiver models need an explicit object pool")
            pool = actions_up_to_size(group, bound)
        self.pool = list(pool)
        self.small = [X for X in self.pool if X.total_size <= SAMPLE_SIZE_CAP] or self.pool

    def terminal(self) -> GAction:
        return terminal(self.group)

    def initial(self) -> GAction:
        return initial(self.group)

    def sample_object(self, rng: random.Random) -> GAction:
        return rng.choice(self.small)

    def sample_map(self, rng: random.Random, source=None, target=None, tries: int = 20) -> GMap:
        for _ in range(tries):
            X = source if source is not None else self.sample_object(rng)
            Y = target if target is not None else self.sample_object(rng)
            u = random_gmap(X, Y, rng)
            if u is not None:
                return u
        X = source if source is not None else self.sample_object(rng)
        return identity_map(X) if target is None else to_terminal(X)

    def connected_objects(self) -> list[GAction]:
        if isinstance(self.group, FiniteGroupoid):
            return [transitive_action(self.group, t) for t in transitive_types(self.group)]
        reps: list[GAction] = []
        for X in self.pool:
            if is_connected(X) and not any(
                Y.total_size == X.total_size and are_isomorphic(X, Y) for Y in reps
            ):
                reps.append(X)
        return reps


@dataclass
class GaloisPresentation:
    model: ActionModel
    fibers: list
    witness: list  # indices into ``fibers``

    def witness_fibers(self) -> list:
        return [self.fibers[i] for i in self.witness]


def action_presentation(G: FiniteGroupoid, bound: int = 4, all_fibers: bool = False) -> GaloisPresentation:
    """``G``-actions with evaluation fibers; the witness set has one fiber per component."""
    model = ActionModel(G, bound=bound)
    fibers = [EvaluationFiber(x) for x in G.objects()]
    witness = list(G.objects()) if all_fibers else [c.base for c in connected_components(G)]
    return GaloisPresentation(model, fibers, witness)


# --------------------------------------------------------------- helpers


def _set_coequalizer_blocks(n: int, pairs) -> list:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(a) for a in range(n)]


def _same_partition(labels_a, labels_b) -> bool:
    fwd, back = {}, {}
    for a, b in zip(labels_a, labels_b):
        if fwd.setdefault(a, b) != b or back.setdefault(b, a) != a:
            return False
    return True


def _is_bijection(f: tuple, n_target: int) -> bool:
    return len(f) == n_target and sorted(f) == list(range(n_target))


def _homs(W, X, budget):
    return [u.components for u in enumerate_gmaps(W, X, budget)]


# ----------------------------------------------------------- axiom checks


def _check_limit(model, rng, budget) -> tuple[bool, str]:
    kind = rng.choice(["terminal", "product", "pullback", "equalizer"])
    W = model.sample_object(rng)
    if kind == "terminal":
        n = len(_homs(W, model.terminal(), budget))
        return n == 1, kind
    X, Y = model.sample_object(rng), model.sample_object(rng)
    if kind == "product":
        P, (p, q) = product(X, Y)
        legs = [p, q]
        cones = set(itertools.product(_homs(W, X, budget), _homs(W, Y, budget)))
    elif kind == "pullback":
        Z = model.sample_object(rng)
        u, v = model.sample_map(rng, X, Z), model.sample_map(rng, Y, Z)
        if u.target != v.target:
            return True, kind
        P, p, q = pullback(u, v)
        legs = [p, q]
        cones = {
            (a, b) for a in _homs(W, X, budget) for b in _homs(W, Y, budget)
            if compose_maps(u, GMap(W, X, a)).components == compose_maps(v, GMap(W, Y, b)).components
        }
    else:
        u, v = model.sample_map(rng, X), None
        v = model.sample_map(rng, X, u.target)
        if v.target != u.target:
            return True, kind
        P, e = equalizer(u, v)
        legs = [e]
        cones = {
            (a,) for a in _homs(W, X, budget)
            if compose_maps(u, GMap(W, X, a)).components == compose_maps(v, GMap(W, X, a)).components
        }
    induced = [tuple(compose_maps(l, GMap(W, P, h)).components for l in legs) for h in _homs(W, P, budget)]
    return len(set(induced)) == len(induced) and set(induced) == cones, kind


def _check_colimit(model, rng, budget) -> tuple[bool, str]:
    kind = rng.choice(["initial", "coproduct", "coequalizer"])
    W = model.sample_object(rng)
    if kind == "initial":
        return len(_homs(model.initial(), W, budget)) == 1, kind
    X, Y = model.sample_object(rng), model.sample_object(rng)
    if kind == "coproduct":
        C, (i, j) = coproduct([X, Y])
        legs = [i, j]
        cocones = set(itertools.product(_homs(X, W, budget), _homs(Y, W, budget)))
    else:
        u = model.sample_map(rng, X, Y)
        v = model.sample_map(rng, X, Y)
        if u.target != v.target:
            return True, kind
        C, q = coequalizer(u, v)
        legs = [q]
        Y = u.target
        cocones = {
            (b,) for b in _homs(Y, W, budget)
            if compose_maps(GMap(Y, W, b), u).components == compose_maps(GMap(Y, W, b), v).components
        }
    induced = [tuple(compose_maps(GMap(C, W, h), l).components for l in legs) for h in _homs(C, W, budget)]
    return len(set(induced)) == len(induced) and set(induced) == cocones, kind


def _check_factorization(model, rng, budget) -> tuple[bool, str]:
    u = model.sample_map(rng)
    fr = epi_mono_factorize(u)
    ok = (
        compose_maps(fr.mono, fr.epi).components == u.components
        and fr.epi.is_surjective()
        and fr.mono.is_injective()
        and fr.iso.is_iso()
    )
    return ok, "factorization"


def fiber_preserves_colimits(F, model, rng) -> tuple[bool, str]:
    kind = rng.choice(["initial", "coproduct", "coequalizer"])
    if kind == "initial":
        return F.size(model.initial()) == 0, kind
    X, Y = model.sample_object(rng), model.sample_object(rng)
    if kind == "coproduct":
        C, (i, j) = coproduct([X, Y])
        img = list(F.map(i)) + list(F.map(j))
        return _is_bijection(tuple(img), F.size(C)), kind
    u, v = model.sample_map(rng, X, Y), model.sample_map(rng, X, Y)
    if u.target != v.target:
        return True, kind
    Q, q = coequalizer(u, v)
    Fq = F.map(q)
    blocks = _set_coequalizer_blocks(F.size(u.target), zip(F.map(u), F.map(v)))
    surjective = set(Fq) == set(range(F.size(Q)))
    return surjective and _same_partition(blocks, Fq), kind


def fiber_preserves_limits(F, model, rng) -> tuple[bool, str]:
    kind = rng.choice(["terminal", "product", "pullback", "equalizer"])
    if kind == "terminal":
        return F.size(model.terminal()) == 1, kind
    X, Y = model.sample_object(rng), model.sample_object(rng)
    if kind == "product":
        P, (p, q) = product(X, Y)
        pairs = list(zip(F.map(p), F.map(q)))
        expected = set(itertools.product(range(F.size(X)), range(F.size(Y))))
        return len(set(pairs)) == len(pairs) and set(pairs) == expected, kind
    if kind == "pullback":
        Z = model.sample_object(rng)
        u, v = model.sample_map(rng, X, Z), model.sample_map(rng, Y, Z)
        if u.target != v.target:
            return True, kind
        P, p, q = pullback(u, v)
        pairs = list(zip(F.map(p), F.map(q)))
        Fu, Fv = F.map(u), F.map(v)
        expected = {(a, b) for a in range(F.size(X)) for b in range(F.size(Y)) if Fu[a] == Fv[b]}
        return len(set(pairs)) == len(pairs) and set(pairs) == expected, kind
    u = model.sample_map(rng, X)
    v = model.sample_map(rng, X, u.target)
    if u.target != v.target:
        return True, kind
    E, e = equalizer(u, v)
    Fe, Fu, Fv = F.map(e), F.map(u), F.map(v)
    expected = {a for a in range(F.size(X)) if Fu[a] == Fv[a]}
    return len(set(Fe)) == len(Fe) and set(Fe) == expected, kind


def _check_conservative(fibers, witness, model, rng) -> tuple[bool, str]:
    u = model.sample_map(rng)
    intrinsic_iso = u.is_iso()
    bij = [_is_bijection(F.map(u), F.size(u.target)) for F in fibers]
    if intrinsic_iso:
        return all(bij), "iso detected by all"
    return not all(bij[i] for i in witness), "non-iso detected"


AXIOMS = (
    "finite limits",
    "finite colimits",
    "factorization",
    "fibers right exact",
    "fibers left exact",
    "conservativity",
)


def check_axioms_on_fragment(
    model: ActionModel, fibers: Sequence, witness: Sequence[int] | None = None,
    samples: int = 200, seed: int = 0, budget=None,
) -> dict:
    """Sampled check of the six axioms; each sample exercises one axiom in rotation."""
    budget = as_budget(budget)
    rng = random.Random(seed)
    witness = list(range(len(fibers))) if witness is None else list(witness)
    results = {a: {"checked": 0, "failures": 0, "examples": []} for a in AXIOMS}
    for s in range(samples):
        axiom = AXIOMS[s % len(AXIOMS)]
        if axiom == "finite limits":
            outcomes = [_check_limit(model, rng, budget)]
        elif axiom == "finite colimits":
            outcomes = [_check_colimit(model, rng, budget)]
        elif axiom == "factorization":
            outcomes = [_check_factorization(model, rng, budget)]
        elif axiom == "fibers right exact":
            state = rng.getstate()
            outcomes = []
            for F in fibers:
                rng.setstate(state)
                ok, kind = fiber_preserves_colimits(F, model, rng)
                outcomes.append((ok, f"{F.name}: {kind}"))
        elif axiom == "fibers left exact":
            state = rng.getstate()
            outcomes = []
            for F in fibers:
                rng.setstate(state)
                ok, kind = fiber_preserves_limits(F, model, rng)
                outcomes.append((ok, f"{F.name}: {kind}"))
        else:
            outcomes = [_check_conservative(fibers, witness, model, rng)]
        entry = results[axiom]
        entry["checked"] += 1
        for ok, what in outcomes:
            if not ok:
                entry["failures"] += 1
                if len(entry["examples"]) < 3:
                    entry["examples"].append({"sample": s, "case": what})
    verdict = all(r["failures"] == 0 for r in results.values())
    return {"verdict": verdict, "samples": samples, "seed": seed, "axioms": results}


def check_projection_exactness(
    model: ActionModel, projections: Sequence, samples: int = 50, seed: int = 0,
) -> dict:
    """Each projection commutes, up to iso, with sampled limits and colimits.

    A projection offers ``obj(X)`` and ``mor(u)`` (a map between projected objects).
    """
    rng = random.Random(seed)
    failures = []
    kinds = ["product", "pullback", "equalizer", "coproduct", "coequalizer", "terminal", "initial"]
    for s in range(samples):
        kind = kinds[s % len(kinds)]
        X, Y = model.sample_object(rng), model.sample_object(rng)
        if kind == "terminal":
            L, parts = model.terminal(), lambda p: terminal(p.obj(X).group)
        elif kind == "initial":
            L, parts = model.initial(), lambda p: initial(p.obj(X).group)
        elif kind == "product":
            L = product(X, Y)[0]
            parts = lambda p: product(p.obj(X), p.obj(Y))[0]
        elif kind == "coproduct":
            L = coproduct([X, Y])[0]
            parts = lambda p: coproduct([p.obj(X), p.obj(Y)])[0]
        else:
            if kind == "pullback":
                Z = model.sample_object(rng)
                u, v = model.sample_map(rng, X, Z), model.sample_map(rng, Y, Z)
            elif kind == "equalizer":
                u = model.sample_map(rng, X)
                v = model.sample_map(rng, X, u.target)
            else:
                u, v = model.sample_map(rng, X, Y), model.sample_map(rng, X, Y)
            if u.target != v.target:
                continue
            op = {"pullback": lambda a, b: pullback(a, b)[0],
                  "equalizer": lambda a, b: equalizer(a, b)[0],
                  "coequalizer": lambda a, b: coequalizer(a, b)[0]}[kind]
            L = op(u, v)
            parts = lambda p, u=u, v=v, op=op: op(p.mor(u), p.mor(v))
        for n, p in enumerate(projections):
            if not are_isomorphic(p.obj(L), parts(p)):
                failures.append({"sample": s, "kind": kind, "projection": n})
    return {"verdict": not failures, "samples": samples, "failures": failures[:5]}


# ------------------------------------------------------- mono / epi / iso


def detect_mono_epi(fibers: Sequence, u: GMap, witness: Sequence[int] | None = None) -> dict:
    """Mono / strict epi / iso verdicts read off the witness fibers."""
    idx = range(len(fibers)) if witness is None else witness
    maps = [(fibers[i].map(u), fibers[i].size(u.target)) for i in idx]
    mono = all(len(set(f)) == len(f) for f, _ in maps)
    epi = all(set(f) == set(range(n)) for f, n in maps)
    return {"mono": mono, "strict_epi": epi, "iso": mono and epi}


# ------------------------------------------------ terminal decomposition


@dataclass
class TerminalDecomposition:
    terminal: GAction
    summands: list
    inclusions: list
    reindex: list  # summand -> fiber index in the witness set

    @property
    def d(self) -> int:
        return len(self.summands)


def terminal_decomposition(P: GaloisPresentation) -> TerminalDecomposition:
    t = P.model.terminal()
    summands, iso = orbit_decomposition(t)
    _, injections = coproduct(summands, t.group) if summands else (None, [])
    inclusions = [compose_maps(iso, inj) for inj in injections]
    reindex = []
    for i, e in enumerate(summands):
        for j in P.witness:
            F = P.fibers[j]
            if F.size(e) == 1 and all(F.size(o) == 0 for k, o in enumerate(summands) if k != i):
                reindex.append(j)
                break
        else:
            raise ReindexFailure(f"no witness fiber singles out summand {i}")
    return TerminalDecomposition(t, summands, inclusions, reindex)


# ---------------------------------------------------------- component split


class ProductFragment:
    """Tuples of objects, one per component, with total size at most ``bound``."""

    def __init__(self, parts: Sequence[Sequence[GAction]], bound: int, budget=None):
        self.parts = [list(p) for p in parts]
        self.bound = bound
        self.budget = as_budget(budget)
        self._objects = [
            t for t in itertools.product(*self.parts) if sum(X.total_size for X in t) <= bound
        ]

    def objects(self):
        return self._objects

    def hom(self, a, b):
        return [tuple(us) for us in itertools.product(
            *[list(enumerate_gmaps(x, y, self.budget)) for x, y in zip(a, b)]
        )]

    def compose(self, g, f):
        return tuple(compose_maps(gi, fi) for gi, fi in zip(g, f))

    def ident(self, a):
        return tuple(identity_map(x) for x in a)


class _ActionCategoryWithIso(ActionCategory):
    def find_iso(self, X, Y):
        return find_iso(X, Y, self.budget)


@dataclass
class ComponentSplit:
    decomposition: TerminalDecomposition
    components: list  # list of lists of fragment objects
    xi: LazyFunctor
    witness: Any
    pieces: dict  # fragment object -> list of (X_i, map X_i -> X)
    coproduct_checks: dict

    def __bool__(self) -> bool:
        return bool(self.witness) and all(self.coproduct_checks.values())


def component_split(P: GaloisPresentation, td: TerminalDecomposition, bound: int | None = None, budget=None) -> ComponentSplit:
    budget = as_budget(budget)
    G = P.model.group
    bound = bound or P.model.bound
    fragment = actions_up_to_size(G, bound)
    pieces, checks = {}, {}
    for X in fragment:
        parts = []
        for e, incl in zip(td.summands, td.inclusions):
            Xi, p1, _ = pullback(to_terminal(X), incl)
            parts.append((Xi, p1))
        pieces[X] = parts
        if parts:
            _, injections = coproduct([Xi for Xi, _ in parts], G)
            back = copair(injections, [p for _, p in parts])
            checks[X] = back.is_iso() and all(
                P.fibers[td.reindex[j]].size(Xi) == 0
                for i, (Xi, _) in enumerate(parts) for j in range(td.d) if j != i
            )
        else:
            checks[X] = X.total_size == 0
    components = []
    for i in range(td.d):
        components.append([
            X for X in fragment
            if all(P.fibers[td.reindex[j]].size(X) == 0 for j in range(td.d) if j != i)
        ])
    source = ProductFragment(components, bound, budget)
    target = _ActionCategoryWithIso(fragment, budget)

    def fobj(t):
        if not t:
            return initial(G)
        return coproduct(list(t), G)[0]

    def fmor(us):
        srcC, inj_s = coproduct([u.source for u in us], G)
        dstC, inj_t = coproduct([u.target for u in us], G)
        return copair(inj_s, [compose_maps(j, u) for j, u in zip(inj_t, us)])

    xi = LazyFunctor(source, target, fobj, fmor)
    witness = decide_equivalence(xi, budget)
    return ComponentSplit(td, components, xi, witness, pieces, checks)


def factor_through_component(
    A, P: GaloisPresentation, split: ComponentSplit, samples: int = 50, seed: int = 0,
) -> tuple[int, Any]:
    """Find the component an exact functor to finite sets factors through."""
    rng = random.Random(seed)
    for s in range(samples):
        check = fiber_preserves_colimits if s % 2 == 0 else fiber_preserves_limits
        ok, kind = check(A, P.model, rng)
        if not ok:
            raise NotExact(f"functor fails to preserve a sampled {kind}")
    td = split.decomposition
    sizes = [A.size(e) for e in td.summands]
    hits = [i for i, n in enumerate(sizes) if n == 1]
    if len(hits) != 1 or any(n != 0 for k, n in enumerate(sizes) if k != hits[0]):
        raise NoComponent(f"summand fiber sizes {sizes} single out no component")
    i = hits[0]
    for X, parts in split.pieces.items():
        Xi, p = parts[i]
        if not _is_bijection(A.map(p), A.size(X)):
            raise NotExact("functor does not factor through the projection onto its component")
    return i, RestrictedFiber(A, i)


@dataclass(frozen=True)
class RestrictedFiber:
    """A functor on the whole category restricted to one component."""

    base: Any
    component: int

    @property
    def name(self) -> str:
        return f"{self.base.name}|component {self.component}"

    def size(self, X):
        return self.base.size(X)

    def map(self, u):
        return self.base.map(u)


# --------------------------------------------------- fundamental groupoid


@dataclass
class FundamentalGroupoidResult:
    groupoid: FiniteGroupoid
    fibers: list
    fragment_objects: int
    evidence: dict

    def summary(self) -> dict:
        return {
            "objects": self.groupoid.n_objects,
            "morphisms": self.groupoid.n_morphisms,
            "fragment_objects": self.fragment_objects,
            "isos_per_pair": self.evidence,
        }


def generating_fragment(model: ActionModel) -> tuple[list, list]:
    """Connected objects, their pairwise products, and maps out of connected objects."""
    conn = model.connected_objects()
    objs = list(conn)
    for a, b in itertools.combinations_with_replacement(range(len(conn)), 2):
        objs.append(product(conn[a], conn[b])[0])
    maps = []
    for X in conn:
        for Y in objs:
            maps += list(enumerate_gmaps(X, Y))
    return objs, maps


def natural_isos(Fa, Fb, objs: Sequence[GAction], maps: Sequence[GMap], budget=None) -> list:
    """Natural isomorphisms ``Fa => Fb`` on the generating fragment."""
    if any(Fa.size(X) != Fb.size(X) for X in objs):
        return []
    pos = {X: n for n, X in enumerate(objs)}
    nodes = [(pos[X], e) for X in objs for e in range(Fa.size(X))]
    edges: dict = {}
    for u in maps:
        s, t = pos[u.source], pos[u.target]
        fa, fb = Fa.map(u), Fb.map(u)
        for e in range(len(fa)):
            edges.setdefault((s, e), []).append(((t, fa[e]), fb.__getitem__))
    out = []
    for val in propagate_assignments(
        nodes, lambda nd: range(Fb.size(objs[nd[0]])), edges, lambda nd: nd[0], budget
    ):
        out.append(tuple(
            tuple(val[(n, e)] for e in range(Fa.size(X))) for n, X in enumerate(objs)
        ))
    return out


def fundamental_groupoid(P: GaloisPresentation, budget=None) -> FundamentalGroupoidResult:
    budget = as_budget(budget)
    fibers = P.witness_fibers()
    objs, maps = generating_fragment(P.model)
    hom = {}
    evidence = {}
    for a, Fa in enumerate(fibers):
        for b, Fb in enumerate(fibers):
            hom[(a, b)] = natural_isos(Fa, Fb, objs, maps, budget)
            evidence[f"{Fa.name}->{Fb.name}"] = len(hom[(a, b)])

    class _Isos:
        def objects(self):
            return list(range(len(fibers)))

        def hom(self, a, b):
            return hom[(a, b)]

        def compose(self, g, f):
            return tuple(tuple(gc[v] for v in fc) for gc, fc in zip(g, f))

        def ident(self, a):
            return tuple(tuple(range(fibers[a].size(X))) for X in objs)

    groupoid = materialize(_Isos(), name="fundamental groupoid", groupoid=True, check=True)
    return FundamentalGroupoidResult(groupoid, [F.name for F in fibers], len(objs), evidence)


# ------------------------------------------------- exact functors from FSets


def fsets_fragment(n: int = 2) -> FiniteCategory:
    """Finite sets ``0..n`` with every function, as an explicit category."""

    class _Sets:
        def objects(self):
            return list(range(n + 1))

        def hom(self, a, b):
            return list(itertools.product(range(b), repeat=a))

        def compose(self, g, f):
            return tuple(g[i] for i in f)

        def ident(self, a):
            return tuple(range(a))

    return materialize(_Sets(), name=f"FSets<= {n}")


def check_closure(C: FiniteCategory) -> None:
    """Raise FragmentNotClosed unless an explicit category has a terminal and an initial object
    and binary products and coproducts of all its objects."""
    objs = C.objects()

    def terminal_like(t):
        return all(len(C.hom(a, t)) == 1 for a in objs)

    def initial_like(t):
        return all(len(C.hom(t, a)) == 1 for a in objs)

    if not any(terminal_like(t) for t in objs):
        raise FragmentNotClosed("no terminal object in the fragment")
    if not any(initial_like(t) for t in objs):
        raise FragmentNotClosed("no initial object in the fragment")
    for a, b in itertools.combinations_with_replacement(objs, 2):
        if not _has_product(C, a, b):
            raise FragmentNotClosed(f"product of objects {a} and {b} is missing")
        if not _has_product(C, a, b, dual=True):
            raise FragmentNotClosed(f"coproduct of objects {a} and {b} is missing")


def _has_product(C, a, b, dual=False) -> bool:
    objs = C.objects()
    hom = (lambda x, y: C.hom(y, x)) if dual else C.hom
    comp = (lambda g, f: C.compose(f, g)) if dual else C.compose
    for p in objs:
        for pa in hom(p, a):
            for pb in hom(p, b):
                if all(
                    len({(comp(pa, h), comp(pb, h)) for h in hom(w, p)}) == len(hom(w, p))
                    == len(hom(w, a)) * len(hom(w, b))
                    for w in objs
                ):
                    return True
    return False


def is_exact_from_fsets(F, S: FiniteCategory, T: FiniteCategory, budget=None) -> bool:
    """Sampled exactness of a functor out of ``fsets_fragment(2)`` into an action fragment."""
    label = {S.obj_labels[a]: a for a in S.objects()}
    G = T.obj_labels[0].group
    zero, one, two = label[0], label[1], label[2]
    img = lambda a: T.obj_labels[F.omap[a]]
    mor = lambda f: T.mor_labels[F.mmap[f]]
    if img(zero).total_size != 0:
        return False
    if not are_isomorphic(img(one), terminal(G)):
        return False
    inj = [f for f in S.hom(one, two) if S.mor_labels[f] in ((0,), (1,))]
    C, cinj = coproduct([img(one), img(one)], G)
    back = copair(cinj, [mor(f) for f in sorted(inj, key=lambda f: S.mor_labels[f])])
    if not back.is_iso():
        return False
    swap = next(f for f in S.hom(two, two) if S.mor_labels[f] == (1, 0))
    ident = S.identity[two]
    E, _ = equalizer(mor(ident), mor(swap))
    return E.total_size == 0


def exact_functors_from_fsets(G: FiniteGroupoid, bound: int | None = None, budget=None) -> dict:
    """Exact functors from finite sets (sizes up to 2) into ``G``-actions, up to natural iso."""
    budget = as_budget(budget)
    bound = bound or 2 * G.n_objects
    S = fsets_fragment(2)
    # exactness forces |F(n)| = n |t|, so only objects of those sizes can be hit
    t_size = terminal(G).total_size
    sizes = {n * t_size for n in range(3)}
    objs = [X for X in actions_up_to_size(G, bound) if X.total_size in sizes]
    T = materialize(ActionCategory(objs, budget), name="actions")
    choices = [
        [b for b in T.objects() if T.obj_labels[b].total_size == S.obj_labels[a] * t_size]
        for a in S.objects()
    ]
    functors = enumerate_functors(S, T, budget, choices)
    exact = [F for F in functors if is_exact_from_fsets(F, S, T, budget)]
    classes: list = []
    for F in exact:
        for cls in classes:
            if any(
                all(T.inverse_of(c) is not None for c in t.components)
                for t in enumerate_natural_transformations(F, cls[0], budget)
            ):
                cls.append(F)
                break
        else:
            classes.append([F])
    return {"size_compatible_functors": len(functors), "exact": len(exact), "classes": len(classes)}
