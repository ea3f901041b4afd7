"""Descent data over Čech diagrams of coverings in the groupoid-action model.

A covering ``{c_i: U_i -> U}`` of an action ``U`` gives action groupoids for
``U``, every ``U_i``, every pairwise pullback ``U_ij`` and every triple
pullback ``U_ijk``, joined by the strict projection functors.  To keep
searches small each level is replaced by a skeleton (one object per
connected component); the price is that composites of face functors only
agree with the canonical projections up to explicit coherence isomorphisms
``m``, which the cocycle condition below accounts for.

A descent datum with values in a target ``T`` (finite sets, or an explicit
finite category) is a family of functors ``x_i: K_i -> T`` with natural
isomorphisms ``phi_ij: x_i d0 => x_j d1`` on ``K_ij`` satisfying the cocycle
condition on every ``K_ijk``.  With finite-set values a datum is the same
thing as a representation of the *descent quiver* (nodes ``(i, k)``, one edge
per non-identity morphism of each ``K_i`` and one edge per object of each
``K_ij``), which is how limits, colimits and maps of data are computed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    CocycleViolation,
    GluingEscapesBound,
    LawViolation,
    NotJointlySurjective,
)
from .fincat import (
    FiniteCategory,
    FiniteGroupoid,
    Functor,
    FunctorCategory,
    LazyFunctor,
    compose_functors,
    connected_components,

)
from .gset import (
    GAction,
    GMap,
    Quiver,
    action_groupoid,
    actions_up_to_size,
    compose_maps,
    enumerate_gmaps,
    enumerate_labeled_actions,
    identity_map,
    is_connected,
    restrict,
    tuple_map,
    wide_pullback,
)
from .search import Constraint, as_budget, solve

FACES = ("ij", "jk", "ik")
# position (0, 1, 2 within the triple) reached by side 0 / side 1 of each face
FACE_POSITIONS = {"ij": (0, 1), "jk": (1, 2), "ik": (0, 2)}


# ------------------------------------------------------------- skeleta


@dataclass
class Skeleton:
    """Full subgroupoid ``K`` of ``A`` on one representative per component.

    ``tau[a]`` is a morphism ``a -> rep(a)`` of ``A`` (identity on
    representatives); ``to_k[f]`` sends a morphism between representatives
    to its id in ``K`` and ``to_a`` goes back.
    """

    A: FiniteGroupoid
    K: FiniteGroupoid
    reps: tuple
    rep_of: tuple
    tau: tuple
    to_k: dict
    to_a: tuple

    def r_obj(self, a: int) -> int:
        return self.rep_of[a]

    def r_mor(self, f: int) -> int:
        A = self.A
        g = A.compose(self.tau[A.dst[f]], A.compose(f, A.inv(self.tau[A.src[f]])))
        return self.to_k[g]

    def i_obj(self, k: int) -> int:
        return self.reps[k]

    def i_mor(self, h: int) -> int:
        return self.to_a[h]


def skeleton(A: FiniteGroupoid) -> Skeleton:
    comps = connected_components(A)
    reps = tuple(c.base for c in comps)
    rep_of = [0] * A.n_objects
    tau = [0] * A.n_objects
    for k, c in enumerate(comps):
        for x in c.objects:
            rep_of[x] = k
            tau[x] = A.inv(c.paths[x])
    src, dst, ident, to_a, labels = [], [], [], [], []
    to_k = {}
    for k, c in enumerate(comps):
        ident.append(None)
        for f in A.hom(c.base, c.base):
            to_k[f] = len(to_a)
            if f == A.identity[c.base]:
                ident[k] = len(to_a)
            src.append(k)
            dst.append(k)
            to_a.append(f)
            labels.append(A.mor_labels[f])
    table = {}
    for g in to_k:
        for f in to_k:
            if A.src[g] == A.dst[f]:
                table[(to_k[g], to_k[f])] = to_k[A.compose(g, f)]
    K = FiniteGroupoid(
        src, dst, ident, table, [A.obj_labels[b] for b in reps], labels,
        inverse=[to_k[A.inv(f)] for f in to_a], name=f"skeleton of {A.name}", check=False,
    )
    return Skeleton(A, K, reps, tuple(rep_of), tuple(tau), to_k, tuple(to_a))


def induced_functor(u: GMap, AX: FiniteGroupoid, AY: FiniteGroupoid) -> Functor:
    """Strict functor between action groupoids induced by an equivariant map."""
    X, Y = u.source, u.target
    G = X.group
    ex = {e: n for n, e in enumerate(X.elements())}
    ey = {e: n for n, e in enumerate(Y.elements())}
    offset_y, n = [], 0
    for f in G.morphisms():
        offset_y.append(n)
        n += Y.size(G.src[f])
    omap = [0] * len(ex)
    for (x, i), k in ex.items():
        omap[k] = ey[(x, u.components[x][i])]
    mmap = []
    for f in G.morphisms():
        a = G.src[f]
        for i in range(X.size(a)):
            mmap.append(offset_y[f] + u.components[a][i])
    return Functor(AX, AY, omap, mmap)


def skeletal_functor(P: Functor, s_src: Skeleton, s_dst: Skeleton) -> Functor:
    """``r ∘ P ∘ ι`` between skeleta."""
    K = s_src.K
    omap = [s_dst.r_obj(P.omap[s_src.i_obj(k)]) for k in K.objects()]
    mmap = [s_dst.r_mor(P.mmap[s_src.i_mor(h)]) for h in K.morphisms()]
    return Functor(K, s_dst.K, omap, mmap)


# --------------------------------------------------------- Čech diagram


@dataclass
class Level:
    action: GAction
    A: FiniteGroupoid
    sk: Skeleton

    @property
    def K(self) -> FiniteGroupoid:
        return self.sk.K


def _level(X: GAction) -> Level:
    A, _ = action_groupoid(X)
    return Level(X, A, skeleton(A))


@dataclass
class CechDiagram:
    group: FiniteGroupoid
    base: Level
    covering: list
    singles: list
    pairs: dict
    triples: dict
    d_pair: dict  # (i, j) -> (d0: K_ij -> K_i, d1: K_ij -> K_j)
    d_triple: dict  # (i, j, k) -> face -> Functor K_ijk -> K_face
    m: dict  # (i, j, k) -> (face, side) -> K_pos morphism per K_ijk object
    legs: list  # a_i: K_i -> K_U
    lam: dict  # (i, j) -> K_U morphism a_i d0 z -> a_j d1 z per K_ij object
    bound: int

    @property
    def n(self) -> int:
        return len(self.singles)

    @property
    def apex(self) -> FiniteGroupoid:
        return self.base.K

    def describe(self) -> dict:
        return {
            "covering_pieces": self.n,
            "fiber_bound": self.bound,
            "base_elements": self.base.action.total_size,
            "skeleton_sizes": {
                "U": self.base.K.n_objects,
                "U_i": [L.K.n_objects for L in self.singles],
                "U_ij": {f"{i}{j}": L.K.n_objects for (i, j), L in sorted(self.pairs.items())},
            },
        }


def check_jointly_surjective(U: GAction, covering: Sequence[GMap]) -> None:
    for x in U.group.objects():
        hit = set()
        for c in covering:
            hit |= set(c.components[x])
        missing = set(range(U.size(x))) - hit
        if missing:
            raise NotJointlySurjective(
                f"base elements {sorted(U.carrier[x][i] for i in missing)} at object {x} not covered"
            )


def fiber_bound(bound: int, covering: Sequence[GMap]) -> int:
    """Per-element fiber size allowed by a total-size bound on the covering pieces."""
    largest = max((c.source.total_size for c in covering), default=1)
    return max(1, bound // max(1, largest))


def build_cech_diagram(
    G: FiniteGroupoid, U: GAction, covering: Sequence[GMap], bound: int | None = None,
    fiber: int | None = None,
) -> CechDiagram:
    """Čech diagram on skeleta.  ``fiber`` overrides the fiber bound derived from ``bound``."""
    covering = list(covering)
    for c in covering:
        c.check_laws()
        if c.target != U:
            raise LawViolation("covering target", c, "covering map does not land in the base")
    check_jointly_surjective(U, covering)
    n = len(covering)
    m_bound = fiber if fiber is not None else fiber_bound(bound or 2 * U.total_size, covering)
    base = _level(U)
    singles = [_level(c.source) for c in covering]
    cover_f = [induced_functor(c, L.A, base.A) for c, L in zip(covering, singles)]
    legs = [skeletal_functor(F, L.sk, base.sk) for F, L in zip(cover_f, singles)]

    pairs, d_pair, lam = {}, {}, {}
    pair_proj = {}
    for i in range(n):
        for j in range(n):
            P, (p0, p1) = wide_pullback([covering[i], covering[j]])
            L = _level(P)
            pairs[(i, j)] = L
            pair_proj[(i, j)] = (p0, p1)
            F0 = induced_functor(p0, L.A, singles[i].A)
            F1 = induced_functor(p1, L.A, singles[j].A)
            d_pair[(i, j)] = (
                skeletal_functor(F0, L.sk, singles[i].sk),
                skeletal_functor(F1, L.sk, singles[j].sk),
            )
            # gluing isos of the canonical cocone: both routes to r_U(P_U z)
            lam[(i, j)] = tuple(
                _lambda_component(z, L, F0, F1, cover_f[i], cover_f[j], singles[i], singles[j], base)
                for z in L.K.objects()
            )

    triples, d_triple, m = {}, {}, {}
    for i, j, k in itertools.product(range(n), repeat=3):
        T, pis = wide_pullback([covering[i], covering[j], covering[k]])
        L = _level(T)
        idx = (i, j, k)
        triples[idx] = L
        faces = {}
        m_here = {}
        for face in FACES:
            a, b = FACE_POSITIONS[face]
            pair = (idx[a], idx[b])
            p0, p1 = pair_proj[pair]
            face_map = tuple_map([p0, p1], [pis[a], pis[b]])
            PL = pairs[pair]
            F_face = induced_functor(face_map, L.A, PL.A)
            faces[face] = skeletal_functor(F_face, L.sk, PL.sk)
            for side, pos in enumerate((a, b)):
                P_side = induced_functor((p0, p1)[side], PL.A, singles[idx[pos]].A)
                target_sk = singles[idx[pos]].sk
                comps = []
                for w in L.K.objects():
                    a_obj = F_face.omap[L.sk.i_obj(w)]
                    back = PL.A.inv(PL.sk.tau[a_obj])
                    comps.append(target_sk.r_mor(P_side.mmap[back]))
                m_here[(face, side)] = tuple(comps)
        d_triple[idx] = faces
        m[idx] = m_here
    return CechDiagram(G, base, covering, singles, pairs, triples, d_pair, d_triple, m, legs, lam, m_bound)


def _lambda_component(z, L, F0, F1, C0, C1, S0, S1, base):
    a = L.sk.i_obj(z)
    chain0 = base.sk.r_mor(C0.mmap[S0.A.inv(S0.sk.tau[F0.omap[a]])])
    chain1 = base.sk.r_mor(C1.mmap[S1.A.inv(S1.sk.tau[F1.omap[a]])])
    K = base.K
    return K.compose(K.inv(chain1), chain0)


# ------------------------------------------------------------ targets


class SetTarget:
    """Finite sets as sizes, maps as index tuples."""

    name = "FSets"

    def compose(self, g, f):
        return tuple(g[i] for i in f)

    def inv(self, f):
        out = [0] * len(f)
        for i, v in enumerate(f):
            out[v] = i
        return tuple(out)

    def ident(self, n):
        return tuple(range(n))

    def isos(self, a, b):
        return list(itertools.permutations(range(a))) if a == b else []

    def is_iso(self, f, a, b):
        return a == b and len(set(f)) == len(f)


class CategoryTarget:
    """An explicit finite category as the value category."""

    def __init__(self, C: FiniteCategory):
        self.C = C
        self.name = C.name

    def compose(self, g, f):
        return self.C.compose(g, f)

    def inv(self, f):
        g = self.C.inverse_of(f)
        if g is None:
            raise LawViolation("invertibility", f)
        return g

    def ident(self, a):
        return self.C.identity[a]

    def isos(self, a, b):
        return [f for f in self.C.hom(a, b) if self.C.inverse_of(f) is not None]

    def is_iso(self, f, a, b):
        return self.C.inverse_of(f) is not None


# --------------------------------------------------------- descent data


@dataclass(eq=False)
class DescentDatum:
    """``x[i]`` a functor ``K_i -> T`` (``obj``/``mor`` protocol); ``phi[(i, j)][z]``."""

    x: tuple
    phi: dict

    def key(self) -> tuple:
        xs = []
        for xi in self.x:
            if isinstance(xi, GAction):
                xs.append((tuple(len(c) for c in xi.carrier), xi.act))
            else:
                xs.append((xi.omap, xi.mmap))
        return tuple(xs), tuple(sorted(self.phi.items()))

    def __eq__(self, other):
        return isinstance(other, DescentDatum) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"DescentDatum(x={[getattr(xi, 'carrier', None) or xi.omap for xi in self.x]})"


def transported(D: CechDiagram, T, datum: DescentDatum, idx: tuple, face: str, w: int):
    """``phi`` of one face moved to ``K_ijk`` through the coherence isos."""
    a, b = FACE_POSITIONS[face]
    pair = (idx[a], idx[b])
    z = D.d_triple[idx][face].omap[w]
    xa, xb = datum.x[idx[a]], datum.x[idx[b]]
    m0 = D.m[idx][(face, 0)][w]
    m1 = D.m[idx][(face, 1)][w]
    return T.compose(T.compose(xb.mor(m1), datum.phi[pair][z]), T.inv(xa.mor(m0)))


def cocycle_violations(D: CechDiagram, T, datum: DescentDatum, limit: int | None = None) -> list:
    out = []
    for idx, L in D.triples.items():
        for w in L.K.objects():
            ij = transported(D, T, datum, idx, "ij", w)
            jk = transported(D, T, datum, idx, "jk", w)
            ik = transported(D, T, datum, idx, "ik", w)
            if ik != T.compose(jk, ij):
                out.append({"triple": list(idx), "object": w})
                if limit is not None and len(out) >= limit:
                    return out
    return out


def naturality_violations(D: CechDiagram, T, datum: DescentDatum) -> list:
    out = []
    for (i, j), L in D.pairs.items():
        d0, d1 = D.d_pair[(i, j)]
        xi, xj = datum.x[i], datum.x[j]
        for g in L.K.morphisms():
            z = L.K.src[g]
            lhs = T.compose(datum.phi[(i, j)][L.K.dst[g]], xi.mor(d0.mmap[g]))
            rhs = T.compose(xj.mor(d1.mmap[g]), datum.phi[(i, j)][z])
            if lhs != rhs:
                out.append({"pair": [i, j], "morphism": g})
    return out


def _natural_isos(D, T, pair, xi, xj):
    """Domain per ``K_ij`` object: isos natural w.r.t. its loops."""
    L = D.pairs[pair]
    d0, d1 = D.d_pair[pair]
    doms = {}
    for z in L.K.objects():
        a, b = xi.obj(d0.omap[z]), xj.obj(d1.omap[z])
        loops = [g for g in L.K.hom(z, z) if g != L.K.identity[z]]
        doms[z] = [
            p for p in T.isos(a, b)
            if all(
                T.compose(p, xi.mor(d0.mmap[g])) == T.compose(xj.mor(d1.mmap[g]), p)
                for g in loops
            )
        ]
    return doms


def enumerate_cocycles(D: CechDiagram, T, x: Sequence, budget=None):
    """Yield every gluing family ``phi`` for fixed components ``x``."""
    budget = as_budget(budget)
    variables, domains = [], {}
    for pair in D.pairs:
        doms = _natural_isos(D, T, pair, x[pair[0]], x[pair[1]])
        for z, dom in doms.items():
            if not dom:
                return
            variables.append((pair, z))
            domains[(pair, z)] = dom
    constraints = []
    for idx, L in D.triples.items():
        for w in L.K.objects():
            roles = {}
            for face in FACES:
                a, b = FACE_POSITIONS[face]
                roles[face] = ((idx[a], idx[b]), D.d_triple[idx][face].omap[w])
            coh = {
                (face, side): D.m[idx][(face, side)][w] for face in FACES for side in (0, 1)
            }
            xs = [x[t] for t in idx]
            constraints.append(_cocycle_constraint(T, roles, coh, xs))
    for asg in solve(variables, domains, constraints, budget):
        phi: dict = {pair: {} for pair in D.pairs}
        for (pair, z), v in asg.items():
            phi.setdefault(pair, {})[z] = v
        yield {pair: tuple(vals[z] for z in sorted(vals)) for pair, vals in phi.items()}


def _cocycle_constraint(T, roles, coh, xs):
    def lift(face, val):
        a, b = FACE_POSITIONS[face]
        return T.compose(T.compose(xs[b].mor(coh[(face, 1)]), val), T.inv(xs[a].mor(coh[(face, 0)])))

    def lower(face, big):
        a, b = FACE_POSITIONS[face]
        return T.compose(T.compose(T.inv(xs[b].mor(coh[(face, 1)])), big), xs[a].mor(coh[(face, 0)]))

    def check(asg):
        ij, jk, ik = (lift(f, asg[roles[f]]) for f in FACES)
        return ik == T.compose(jk, ij)

    scope = tuple(dict.fromkeys(roles[f] for f in FACES))
    infer = None
    if len(scope) == 3:
        def infer(asg, var):
            face = next(f for f in FACES if roles[f] == var)
            known = {f: lift(f, asg[roles[f]]) for f in FACES if f != face}
            if face == "ik":
                big = T.compose(known["jk"], known["ij"])
            elif face == "ij":
                big = T.compose(T.inv(known["jk"]), known["ik"])
            else:
                big = T.compose(known["ik"], T.inv(known["ij"]))
            return lower(face, big)

    return Constraint(scope, check, infer)


# ------------------------------------------------------ descent quiver


@dataclass
class DescentQuiver:
    quiver: Quiver
    node: dict  # (i, k) -> node id
    k_edge: dict  # (i, g) -> edge id
    phi_edge: dict  # ((i, j), z) -> edge id


def descent_quiver(D: CechDiagram) -> DescentQuiver:
    node, labels = {}, []
    for i, L in enumerate(D.singles):
        for k in L.K.objects():
            node[(i, k)] = len(labels)
            labels.append((i, k))
    src, dst, mlabels = [], [], []
    k_edge, phi_edge = {}, {}
    for i, L in enumerate(D.singles):
        for g in L.K.morphisms():
            if g in L.K.identity:
                continue
            k_edge[(i, g)] = len(src)
            src.append(node[(i, L.K.src[g])])
            dst.append(node[(i, L.K.dst[g])])
            mlabels.append(("loop", i, g))
    for (i, j), L in sorted(D.pairs.items()):
        d0, d1 = D.d_pair[(i, j)]
        for z in L.K.objects():
            phi_edge[((i, j), z)] = len(src)
            src.append(node[(i, d0.omap[z])])
            dst.append(node[(j, d1.omap[z])])
            mlabels.append(("glue", i, j, z))
    Q = Quiver(src, dst, labels, mlabels, name="descent quiver")
    return DescentQuiver(Q, node, k_edge, phi_edge)


def datum_action(DQ: DescentQuiver, datum: DescentDatum) -> GAction:
    """A finite-set datum as a representation of the descent quiver."""
    Q = DQ.quiver
    carrier = [None] * Q.n_objects
    for (i, k), n in DQ.node.items():
        carrier[n] = datum.x[i].carrier[k]
    act = [None] * Q.n_morphisms
    for (i, g), e in DQ.k_edge.items():
        act[e] = datum.x[i].act[g]
    for (pair, z), e in DQ.phi_edge.items():
        act[e] = datum.phi[pair][z]
    return GAction(Q, tuple(carrier), tuple(act))


def action_datum(D: CechDiagram, DQ: DescentQuiver, X: GAction) -> DescentDatum:
    """Inverse of :func:`datum_action`."""
    xs = []
    for i, L in enumerate(D.singles):
        K = L.K
        act = []
        for g in K.morphisms():
            if g in K.identity:
                act.append(tuple(range(X.size(DQ.node[(i, K.src[g])]))))
            else:
                act.append(X.act[DQ.k_edge[(i, g)]])
        xs.append(GAction(K, tuple(X.carrier[DQ.node[(i, k)]] for k in K.objects()), tuple(act)))
    phi: dict = {pair: [] for pair in D.pairs}
    for (pair, z), e in sorted(DQ.phi_edge.items()):
        phi.setdefault(pair, []).append(X.act[e])
    return DescentDatum(tuple(xs), {p: tuple(v) for p, v in phi.items()})


# ---------------------------------------------------- descent category


class DescentCategory:
    """Protocol category of descent data with values in ``target``.

    With finite-set values objects are enumerated with per-node size at most
    the diagram's fiber bound; ``up_to_iso`` keeps one datum per iso class.
    """

    def __init__(
        self, D: CechDiagram, target=None, budget=None, up_to_iso: bool = False,
        connected: bool = False,
    ):
        self.D = D
        self.connected = connected
        self.T = target if target is not None else SetTarget()
        self.sets = isinstance(self.T, SetTarget)
        self.budget = as_budget(budget)
        self.up_to_iso = up_to_iso
        self.DQ = descent_quiver(D) if self.sets else None
        self._objects = None
        self._hom: dict = {}
        self._action: dict = {}

    # -- objects
    def component_choices(self, i: int) -> list:
        K = self.D.singles[i].K
        if not self.sets:
            from .fincat import enumerate_functors

            return enumerate_functors(K, self.T.C, self.budget)
        m = self.D.bound
        if self.up_to_iso:
            return actions_up_to_size(K, m * max(1, K.n_objects), max_fiber=m)
        return list(enumerate_labeled_actions(K, m, self.budget))

    def objects(self) -> list:
        if self._objects is None and self.connected:
            self._objects = self._connected_objects()
        if self._objects is None:
            out = []
            choices = [self.component_choices(i) for i in range(self.D.n)]
            for x in itertools.product(*choices):
                sols = list(enumerate_cocycles(self.D, self.T, x, self.budget))
                if self.up_to_iso:
                    sols = self._orbit_reps(x, sols)
                out += [DescentDatum(tuple(x), phi) for phi in sols]
            self._objects = out
        return self._objects

    def _connected_objects(self) -> list:
        """Connected finite-set data, one per iso class.

        A connected datum lives over a single apex component ``c``; its
        fibers are capped by ``min(bound, |vertex group of c|)``.
        """
        D = self.D
        apex_comps = connected_components(D.apex)
        where = {a: n for n, c in enumerate(apex_comps) for a in c.objects}
        reps: list = []
        for c_idx, comp in enumerate(apex_comps):
            m = min(D.bound, comp.order)
            choices = []
            for i, L in enumerate(D.singles):
                over = {
                    n for n, kc in enumerate(connected_components(L.K))
                    if where[D.legs[i].omap[kc.base]] == c_idx
                }
                choices.append(actions_up_to_size(
                    L.K, m * max(1, L.K.n_objects), max_fiber=m, components=over,
                ))
            for x in itertools.product(*choices):
                if all(xi.total_size == 0 for xi in x):
                    continue
                for phi in enumerate_cocycles(D, self.T, x, self.budget):
                    d = DescentDatum(tuple(x), phi)
                    A = datum_action(self.DQ, d)
                    if not is_connected(A):
                        continue
                    if any(_iso_actions(A, self.action(r), self.budget) for r in reps):
                        continue
                    self._action[d] = A
                    reps.append(d)
        return reps

    def _orbit_reps(self, x, sols):
        """One gluing family per orbit of ``prod Aut(x_i)``."""
        D, T = self.D, self.T
        auts = []
        for xi in x:
            if self.sets:
                auts.append([g.components for g in enumerate_gmaps(xi, xi, self.budget, isos_only=True)])
            else:
                from .fincat import enumerate_natural_transformations

                auts.append([
                    t.components for t in enumerate_natural_transformations(xi, xi, self.budget)
                    if all(self.T.C.inverse_of(c) is not None for c in t.components)
                ])
        remaining = {tuple(sorted(p.items())): p for p in sols}
        reps = []
        for key in sorted(remaining):
            if key not in remaining:
                continue
            phi = remaining[key]
            reps.append(phi)
            for a in itertools.product(*auts):
                self.budget.tick()
                moved = {}
                for (i, j), comps in phi.items():
                    d0, d1 = D.d_pair[(i, j)]
                    moved[(i, j)] = tuple(
                        T.compose(T.compose(_aut_at(a[j], d1.omap[z]), comps[z]),
                                  T.inv(_aut_at(a[i], d0.omap[z])))
                        for z in range(len(comps))
                    )
                remaining.pop(tuple(sorted(moved.items())), None)
        return reps

    # -- morphisms
    def action(self, d: DescentDatum) -> GAction:
        if d not in self._action:
            self._action[d] = datum_action(self.DQ, d)
        return self._action[d]

    def hom(self, a: DescentDatum, b: DescentDatum) -> list:
        key = (a, b)
        if key not in self._hom:
            if self.sets:
                self._hom[key] = list(enumerate_gmaps(self.action(a), self.action(b), self.budget))
            else:
                self._hom[key] = self._category_hom(a, b)
        return self._hom[key]

    def _category_hom(self, a, b, isos_only=False) -> list:
        D, C = self.D, self.T.C
        variables, domains, constraints = [], {}, []
        for i, L in enumerate(D.singles):
            for k in L.K.objects():
                src, dst = a.x[i].fobj(k), b.x[i].fobj(k)
                dom = list(C.hom(src, dst))
                if isos_only:
                    dom = [f for f in dom if C.inverse_of(f) is not None]
                loops = [g for g in L.K.hom(k, k) if g != L.K.identity[k]]
                dom = [
                    f for f in dom
                    if all(C.compose(f, a.x[i].fmor(g)) == C.compose(b.x[i].fmor(g), f) for g in loops)
                ]
                variables.append((i, k))
                domains[(i, k)] = dom
        for (i, j), L in D.pairs.items():
            d0, d1 = D.d_pair[(i, j)]
            for z in L.K.objects():
                u, v = (i, d0.omap[z]), (j, d1.omap[z])
                pa, pb = a.phi[(i, j)][z], b.phi[(i, j)][z]

                def check(asg, u=u, v=v, pa=pa, pb=pb):
                    return C.compose(pb, asg[u]) == C.compose(asg[v], pa)

                constraints.append(Constraint(tuple(dict.fromkeys((u, v))), check))
        return [
            tuple(tuple(asg[(i, k)] for k in L.K.objects()) for i, L in enumerate(D.singles))
            for asg in solve(variables, domains, constraints, self.budget)
        ]

    def compose(self, g, f):
        if self.sets:
            return compose_maps(g, f)
        C = self.T.C
        return tuple(
            tuple(C.compose(gc, fc) for gc, fc in zip(gi, fi)) for gi, fi in zip(g, f)
        )

    def ident(self, a):
        if self.sets:
            return identity_map(self.action(a))
        return tuple(
            tuple(self.T.C.identity[xi.fobj(k)] for k in L.K.objects())
            for xi, L in zip(a.x, self.D.singles)
        )

    def find_iso(self, a, b):
        if self.sets:
            return next(enumerate_gmaps(self.action(a), self.action(b), self.budget, isos_only=True), None)
        isos = self._category_hom(a, b, isos_only=True)
        return isos[0] if isos else None

    def lookup(self, d: DescentDatum) -> DescentDatum:
        """The enumerated object equal to ``d`` (raises if outside the fragment)."""
        table = getattr(self, "_index", None)
        if table is None:
            table = self._index = {o: o for o in self.objects()}
        try:
            return table[d]
        except KeyError:
            raise GluingEscapesBound("datum lies outside the enumerated fragment") from None


def _iso_actions(X: GAction, Y: GAction, budget) -> bool:
    return next(enumerate_gmaps(X, Y, budget, isos_only=True), None) is not None


def _aut_at(a, k):
    return a[k]


def descent_category(D: CechDiagram, target=None, budget=None, up_to_iso=False) -> DescentCategory:
    return DescentCategory(D, target, budget, up_to_iso)


# ------------------------------------------------------- cocone and kappa


def kappa_object(D: CechDiagram, T, chi) -> DescentDatum:
    """``chi ∘ a_i`` with gluing ``chi(lambda)``."""
    xs = []
    for a in D.legs:
        if isinstance(chi, GAction):
            xs.append(restrict(chi, a))
        else:
            xs.append(compose_functors(chi, a))
    phi = {pair: tuple(chi.mor(l) for l in lams) for pair, lams in D.lam.items()}
    return DescentDatum(tuple(xs), phi)


def kappa_morphism(D: CechDiagram, cat: DescentCategory, theta, chi_src, chi_dst):
    """Whisker a morphism of the apex side along the legs."""
    if cat.sets:
        a = cat.lookup(kappa_object(D, cat.T, chi_src))
        b = cat.lookup(kappa_object(D, cat.T, chi_dst))
        comps = [None] * cat.DQ.quiver.n_objects
        for (i, k), n in cat.DQ.node.items():
            comps[n] = theta.components[D.legs[i].omap[k]]
        return GMap(cat.action(a), cat.action(b), tuple(comps))
    return tuple(
        tuple(theta.components[leg.omap[k]] for k in L.K.objects())
        for leg, L in zip(D.legs, D.singles)
    )


def apex_fragment(D: CechDiagram) -> list[GAction]:
    """Actions of the apex skeleton, one per iso class, fiber size at most the bound."""
    K, m = D.apex, D.bound
    return actions_up_to_size(K, m * max(1, K.n_objects), max_fiber=m)


class ApexSets:
    """Protocol category of apex actions up to iso (the stack side)."""

    def __init__(self, objects, budget=None):
        self._objects = list(objects)
        self.budget = as_budget(budget)
        self._hom: dict = {}

    def objects(self):
        return self._objects

    def hom(self, X, Y):
        if (X, Y) not in self._hom:
            self._hom[(X, Y)] = list(enumerate_gmaps(X, Y, self.budget))
        return self._hom[(X, Y)]

    def compose(self, g, f):
        return compose_maps(g, f)

    def ident(self, X):
        return identity_map(X)


def comparison_functor(D: CechDiagram, cat: DescentCategory, source=None) -> LazyFunctor:
    """Stack-side comparison: apex actions to finite-set descent data."""
    source = source or ApexSets(apex_fragment(D), cat.budget)

    def fobj(X):
        return cat.lookup(kappa_object(D, cat.T, X))

    def fmor(u):
        return kappa_morphism(D, cat, u, u.source, u.target)

    return LazyFunctor(source, cat, fobj, fmor)


def kappa(D: CechDiagram, C: FiniteCategory, budget=None) -> tuple[LazyFunctor, DescentCategory]:
    """``Hom(apex, C) -> descent data with values in C``."""
    budget = as_budget(budget)
    T = CategoryTarget(C)
    cat = DescentCategory(D, T, budget)
    source = FunctorCategory(D.apex, C, budget)

    def fobj(chi):
        return cat.lookup(kappa_object(D, T, chi))

    def fmor(theta):
        return kappa_morphism(D, cat, theta, theta.source, theta.target)

    return LazyFunctor(source, cat, fobj, fmor), cat


# ---------------------------------------------------------------- gluing


def glue_descent_datum(D: CechDiagram, datum: DescentDatum, cat: DescentCategory | None = None):
    """Glue a finite-set datum into an apex action ``Y`` with ``κ(Y) ≅ datum``.

    Returns ``(Y, iso)`` where ``iso`` is a map of quiver representations
    from the datum to ``κ(Y)``.
    """
    T = SetTarget()
    bad = cocycle_violations(D, T, datum, limit=5) + naturality_violations(D, T, datum)
    if bad:
        raise CocycleViolation("descent datum violates the cocycle condition", bad)
    K = D.apex
    raw = []
    index = {}
    for i, L in enumerate(D.singles):
        leg = D.legs[i]
        for k in L.K.objects():
            u = leg.omap[k]
            for e in range(datum.x[i].size(k)):
                for h in K.hom(u, u):
                    index[(i, k, e, h)] = len(raw)
                    raw.append((i, k, e, h))
    parent = list(range(len(raw)))

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    def union(p, q):
        rp, rq = find(index[p]), find(index[q])
        if rp != rq:
            parent[max(rp, rq)] = min(rp, rq)

    for i, L in enumerate(D.singles):
        leg, xi = D.legs[i], datum.x[i]
        for g in L.K.morphisms():
            k = L.K.src[g]
            ag_inv = K.inv(leg.mmap[g])
            for e in range(xi.size(k)):
                for h in K.hom(leg.omap[k], leg.omap[k]):
                    union((i, k, e, h), (i, L.K.dst[g], xi.act[g][e], K.compose(h, ag_inv)))
    for (i, j), L in D.pairs.items():
        d0, d1 = D.d_pair[(i, j)]
        for z in L.K.objects():
            lam = D.lam[(i, j)][z]
            k0, k1 = d0.omap[z], d1.omap[z]
            u = D.legs[i].omap[k0]
            for e in range(datum.x[i].size(k0)):
                for h in K.hom(u, u):
                    union((i, k0, e, h), (j, k1, datum.phi[(i, j)][z][e], K.compose(h, K.inv(lam))))
    classes = [[] for _ in K.objects()]
    cls_pos = {}
    for n, (i, k, e, h) in enumerate(raw):
        r = find(n)
        if r == n:
            u = K.dst[h]
            cls_pos[r] = (u, len(classes[u]))
            classes[u].append(raw[n])
    act = []
    for l in K.morphisms():
        u = K.src[l]
        row = []
        for (i, k, e, h) in classes[u]:
            row.append(cls_pos[find(index[(i, k, e, K.compose(l, h))])][1])
        act.append(tuple(row))
    Y = GAction(K, tuple(tuple(c) for c in classes), tuple(act))
    Y.check_laws()
    if any(Y.size(u) > D.bound for u in K.objects()):
        raise GluingEscapesBound(f"glued fiber of size {max(Y.size(u) for u in K.objects())} exceeds bound {D.bound}")
    DQ = cat.DQ if cat is not None and cat.sets else descent_quiver(D)
    source = datum_action(DQ, datum)
    image = datum_action(DQ, kappa_object(D, T, Y))
    comps = [None] * DQ.quiver.n_objects
    for (i, k), nd in DQ.node.items():
        u = D.legs[i].omap[k]
        ident = K.identity[u]
        comps[nd] = tuple(cls_pos[find(index[(i, k, e, ident)])][1] for e in range(datum.x[i].size(k)))
    iso = GMap(source, image, tuple(comps))
    iso.check_laws()
    if not iso.is_iso():
        raise CocycleViolation("gluing map is not bijective", [])
    return Y, iso


def corrupt_datum(D: CechDiagram, datum: DescentDatum) -> DescentDatum:
    """Double a datum and swap the two copies over one ``K_ij`` object.

    The first swap position that breaks the cocycle condition is used.
    """
    T = SetTarget()
    doubled = []
    for xi in datum.x:
        K = xi.group
        carrier = tuple(tuple((t, l) for t in (0, 1) for l in c) for c in xi.carrier)
        act = tuple(tuple(list(a) + [len(a) + v for v in a]) for a in xi.act)
        doubled.append(GAction(K, carrier, act))
    base_phi = {
        pair: tuple(tuple(list(p) + [len(p) + v for v in p]) for p in comps)
        for pair, comps in datum.phi.items()
    }
    for pair in sorted(base_phi):
        for z, p in enumerate(base_phi[pair]):
            n = len(p) // 2
            if n == 0:
                continue
            swapped = tuple((v + n) % (2 * n) for v in p)
            phi = dict(base_phi)
            phi[pair] = base_phi[pair][:z] + (swapped,) + base_phi[pair][z + 1:]
            candidate = DescentDatum(tuple(doubled), phi)
            if cocycle_violations(D, T, candidate, limit=1):
                return candidate
    raise CocycleViolation("no single swap breaks the cocycle for this datum", [])


# ------------------------------------------------------------ verifier


@dataclass
class LevelProjection:
    """Descent data to actions of one covering piece (``x_i``)."""

    D: CechDiagram
    DQ: DescentQuiver
    i: int

    def obj(self, X: GAction) -> GAction:
        return action_datum(self.D, self.DQ, X).x[self.i]

    def mor(self, u: GMap) -> GMap:
        K = self.D.singles[self.i].K
        comps = tuple(u.components[self.DQ.node[(self.i, k)]] for k in K.objects())
        return GMap(self.obj(u.source), self.obj(u.target), comps)


@dataclass
class StackReport:
    essential: list
    fully_faithful: list
    galois: dict
    projections: dict
    verdict: bool
    bound: int
    violations: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "fiber_bound": self.bound,
            "descent_data": len(self.essential),
            "glued": sum(1 for e in self.essential if e["glued"]),
            "unique_gluing": all(e.get("unique", False) for e in self.essential),
            "hom_pairs_checked": len(self.fully_faithful),
            "hom_bijections": sum(1 for e in self.fully_faithful if e["bijective"]),
            "galois_axioms": self.galois,
            "projections_exact": self.projections,
            "cocycle_violations": self.violations[:10],
        }


def verify_stack(
    D: CechDiagram, samples: int = 200, seed: int = 0, budget=None, extra_data: Sequence = (),
) -> StackReport:
    """Comparison functor on the bounded fragments is an equivalence, plus Galois checks."""
    from .galois import ActionModel, EvaluationFiber, check_axioms_on_fragment, check_projection_exactness

    budget = as_budget(budget)
    cat = DescentCategory(D, SetTarget(), budget)
    source = ApexSets(apex_fragment(D), budget)
    F = comparison_functor(D, cat, source)
    images = {X: F.fobj(X) for X in source.objects()}
    essential = []
    violations = []
    for d in list(cat.objects()) + list(extra_data):
        entry = {"datum": repr(d), "glued": False}
        try:
            Y, iso = glue_descent_datum(D, d, cat)
            entry["glued"] = iso.is_iso()
            hits = [X for X in source.objects() if cat.find_iso(images[X], d) is not None]
            entry["unique"] = len(hits) == 1
        except CocycleViolation as exc:
            violations += exc.witnesses
            entry["error"] = str(exc)
        essential.append(entry)
    ff = []
    objs = source.objects()
    for X in objs:
        for Y in objs:
            hs = source.hom(X, Y)
            ht = cat.hom(images[X], images[Y])
            img = [F.fmor(u) for u in hs]
            ok = len(set(img)) == len(img) == len(ht) and set(img) == set(ht)
            ff.append({"pair": (X.describe(), Y.describe()), "bijective": ok})
    actions = [cat.action(d) for d in cat.objects()]
    model = ActionModel(cat.DQ.quiver, actions)
    fibers = [EvaluationFiber(n) for n in range(cat.DQ.quiver.n_objects)]
    galois = check_axioms_on_fragment(model, fibers, samples=samples, seed=seed, budget=budget)
    projections = check_projection_exactness(
        model, [LevelProjection(D, cat.DQ, i) for i in range(D.n)], samples=min(samples, 50), seed=seed,
    )
    verdict = (
        all(e["glued"] and e.get("unique", False) for e in essential)
        and all(e["bijective"] for e in ff)
        and galois["verdict"]
        and projections["verdict"]
    )
    return StackReport(essential, ff, galois, projections, verdict, D.bound, violations)
