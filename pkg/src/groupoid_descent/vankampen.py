"""Seifert-van Kampen checks: the groupoid of elements of the base as a 2-colimit.

Two independent routes are offered.  The direct route builds the canonical
cocone from the covering diagram of groupoids of elements and certifies that
``κ: Hom(apex, C) -> descent data in C`` is an equivalence for every test
category ``C``.  The dual route compares apex actions with finite-set descent
data up to isomorphism, then rebuilds a groupoid from fiber functors on the
descent side and checks it against the apex.
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass
from typing import Sequence

from .descent import (
    CategoryTarget,
    CechDiagram,
    DescentCategory,
    SetTarget,
    build_cech_diagram,
    cocycle_violations,
    datum_action,
    kappa,
    kappa_object,
    naturality_violations,
)
from .errors import BudgetExceeded, GluingEscapesBound, GroupoidDescentError
from .fincat import (
    FiniteGroupoid,
    connected_components,
    decide_equivalence,
    groupoids_equivalent,
    identity_functor,
    preset_groupoid,
)
from .galois import ActionModel, EvaluationFiber, GaloisPresentation, fundamental_groupoid
from .gset import (
    GAction,
    GMap,
    compose_maps,
    copair,
    coproduct,
    enumerate_gmaps,
    find_iso,
    identity_map,
    orbit_decomposition,
    orbits,
    product,
    terminal,
    transitive_action,
    transitive_types,
)
from .search import as_budget

STANDARD_TESTS = ("terminal", "discrete-2", "C2", "C3", "S3")


@dataclass
class SvkScenario:
    group: FiniteGroupoid
    base: GAction
    covering: list
    tests: list  # (name, FiniteCategory); "apex" is resolved against the cocone
    fiber: int | None = None
    seed: int = 0


def standard_tests(include_apex: bool = True) -> list:
    tests = [(name, preset_groupoid(name)) for name in STANDARD_TESTS]
    if include_apex:
        tests.append(("apex", None))
    return tests


def regular_covering(G: FiniteGroupoid, U: GAction) -> list[GMap]:
    """One free connected action per orbit of the base, copaired into a single map."""
    free = {
        t.component: transitive_action(G, t)
        for t in transitive_types(G) if len(t.subgroup) == 1
    }
    comps = connected_components(G)
    where = {a: n for n, c in enumerate(comps) for a in c.objects}
    pieces, legs = [], []
    for O in orbits(U):
        x, _ = next(iter(O))
        R = free[where[x]]
        u = next((v for v in enumerate_gmaps(R, U) if _image_meets(v, O)), None)
        if u is None:
            raise GroupoidDescentError("an orbit of the base is not hit by a free action")
        pieces.append(R)
        legs.append(u)
    if not pieces:
        return []
    _, injections = coproduct(pieces, G)
    return [copair(injections, legs)]


def _image_meets(u: GMap, orbit) -> bool:
    return any(i in orbit for i in (
        (x, j) for x in u.source.group.objects() for j in u.components[x]
    ))


def component_covering(U: GAction) -> list[GMap]:
    parts, iso = orbit_decomposition(U)
    _, injections = coproduct(parts, U.group)
    return [compose_maps(iso, j) for j in injections]


def make_scenario(
    G: FiniteGroupoid, covering: str = "regular", base: GAction | None = None,
    tests: Sequence | None = None, fiber: int | None = None, seed: int = 0,
) -> SvkScenario:
    U = base if base is not None else terminal(G)
    if covering == "regular":
        cov = regular_covering(G, U)
    elif covering == "identity":
        cov = [identity_map(U)]
    elif covering == "components":
        cov = component_covering(U)
    else:
        raise ValueError(f"unknown covering kind {covering!r}")
    return SvkScenario(G, U, cov, list(tests) if tests is not None else standard_tests(), fiber, seed)


def default_fiber(D_apex: FiniteGroupoid) -> int:
    """Largest vertex group order: every connected apex action fits."""
    return max((c.order for c in connected_components(D_apex)), default=1)


# ---------------------------------------------------------------- cocone


@dataclass
class Cocone:
    diagram: CechDiagram
    cocycle_violations: list

    @property
    def apex(self) -> FiniteGroupoid:
        return self.diagram.apex

    @property
    def legs(self) -> list:
        return self.diagram.legs

    @property
    def lam(self) -> dict:
        return self.diagram.lam

    @property
    def cocycle_ok(self) -> bool:
        return not self.cocycle_violations


def cocone_violations(D: CechDiagram) -> list:
    """The cocone is coherent iff the identity of the apex gives a descent datum."""
    T = CategoryTarget(D.apex)
    datum = kappa_object(D, T, identity_functor(D.apex))
    return cocycle_violations(D, T, datum) + naturality_violations(D, T, datum)


def canonical_cocone(s: SvkScenario, fiber: int | None = None) -> Cocone:
    D = build_cech_diagram(s.group, s.base, s.covering, fiber=fiber or s.fiber or 1)
    return Cocone(D, cocone_violations(D))


def corrupt_cocone(c: Cocone) -> Cocone:
    """Twist one gluing component by a nontrivial apex automorphism.

    The first twist that breaks the cocycle condition is used.
    """
    D = c.diagram
    K = D.apex
    for pair in sorted(D.lam):
        comps = D.lam[pair]
        for z, l in enumerate(comps):
            u = K.dst[l]
            for g in K.hom(u, u):
                if g == K.identity[u]:
                    continue
                twisted = comps[:z] + (K.compose(g, l),) + comps[z + 1:]
                lam = dict(D.lam)
                lam[pair] = twisted
                bad = dataclasses.replace(D, lam=lam)
                violations = cocone_violations(bad)
                if violations:
                    return Cocone(bad, violations)
    raise GroupoidDescentError("apex has no automorphism that breaks the cocone")


# ---------------------------------------------------------- direct route


@dataclass
class UniversalityVerdict:
    results: dict  # test name -> summary dict
    suite: list

    @property
    def verdict(self) -> bool:
        return all(r["verdict"] == "pass" for r in self.results.values())

    def summary(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "suite": self.suite,
            "tests": self.results,
        }


def verify_2colim_universal(c: Cocone, tests: Sequence, budget=None) -> UniversalityVerdict:
    results = {}
    for name, C in tests:
        C = c.apex if C is None else C
        run_budget = as_budget(budget.limit if hasattr(budget, "limit") else budget)
        entry = {"verdict": "fail"}
        try:
            F, cat = kappa(c.diagram, C, run_budget)
            entry["hom_objects"] = len(F.source.objects())
            entry["descent_objects"] = len(cat.objects())
            w = decide_equivalence(F, run_budget)
            entry["verdict"] = "pass" if w else "fail"
            entry["evidence"] = w.summary()
        except BudgetExceeded as exc:
            entry["verdict"] = "budget-exceeded"
            entry["evidence"] = str(exc)
        except GluingEscapesBound:
            entry["evidence"] = {"verdict": "refuted", "reason": "kappa image violates the cocycle condition"}
        results[name] = entry
    return UniversalityVerdict(results, [name for name, _ in tests])


# ------------------------------------------------------------ dual route


@dataclass
class DualReport:
    verdict: bool
    fiber: int
    apex_objects: int
    descent_classes: int
    essential: dict
    fully_faithful: dict
    reconstruction: dict

    def summary(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "fiber_bound": self.fiber,
            "apex_objects": self.apex_objects,
            "descent_classes": self.descent_classes,
            "essential_surjectivity": self.essential,
            "full_faithfulness": self.fully_faithful,
            "reconstruction": self.reconstruction,
        }


def verify_costack_dual(s: SvkScenario, fiber: int | None = None, budget=None) -> DualReport:
    """Apex actions against finite-set descent data, then Π₁ rebuilt from the descent side.

    Only connected objects are compared: every action is a coproduct of
    connected ones and both sides preserve coproducts.  Full faithfulness is
    checked from connected sources into connected objects and their binary
    products.
    """
    budget = as_budget(budget)
    probe = build_cech_diagram(s.group, s.base, s.covering, fiber=1)
    m = fiber or s.fiber or default_fiber(probe.apex)
    D = build_cech_diagram(s.group, s.base, s.covering, fiber=m)
    T = SetTarget()
    cat = DescentCategory(D, T, budget, connected=True)
    reps = cat.objects()
    rep_actions = [cat.action(d) for d in reps]
    conn = [transitive_action(D.apex, t) for t in transitive_types(D.apex)]
    conn = [X for X in conn if all(X.size(k) <= m for k in D.apex.objects())]

    def image(X):
        return datum_action(cat.DQ, kappa_object(D, T, X))

    hit_by: dict = {}
    well_defined = True
    for X in conn:
        cls = [n for n, R in enumerate(rep_actions) if find_iso(image(X), R, budget) is not None]
        if len(cls) != 1:
            well_defined = False
        for n in cls:
            hit_by.setdefault(n, []).append(X)
    essential = {
        "connected_apex_actions": len(conn),
        "connected_descent_classes": len(reps),
        "classes_hit": len(hit_by),
        "images_classified": well_defined,
    }
    ess_ok = (
        well_defined and len(hit_by) == len(reps)
        and all(len(v) == 1 for v in hit_by.values())
    )

    targets = list(conn) + [
        product(conn[a], conn[b])[0]
        for a, b in itertools.combinations_with_replacement(range(len(conn)), 2)
    ]
    target_images = [image(Y) for Y in targets]
    checked = bijective = 0
    for X in conn:
        IX = image(X)
        for Y, IY in zip(targets, target_images):
            img = [_whisker(D, cat, u) for u in enumerate_gmaps(X, Y, budget)]
            ht = {u.components for u in enumerate_gmaps(IX, IY, budget)}
            checked += 1
            if len(set(img)) == len(img) == len(ht) and set(img) == ht:
                bijective += 1
    ff = {"pairs_checked": checked, "bijective": bijective}
    ff_ok = checked == bijective

    model = ActionModel(cat.DQ.quiver, rep_actions)
    fibers = [EvaluationFiber(n) for n in range(cat.DQ.quiver.n_objects)]
    P = GaloisPresentation(model, fibers, list(range(len(fibers))))
    pi1 = fundamental_groupoid(P, budget)
    equiv = groupoids_equivalent(pi1.groupoid, D.apex)
    reconstruction = {
        "fundamental_groupoid": pi1.summary(),
        "equivalent_to_apex": bool(equiv),
        "evidence": equiv.summary(),
    }
    verdict = ess_ok and ff_ok and bool(equiv)
    return DualReport(verdict, m, len(conn), len(reps), essential, ff, reconstruction)


def _whisker(D: CechDiagram, cat: DescentCategory, u: GMap) -> tuple:
    comps = [None] * cat.DQ.quiver.n_objects
    for (i, k), n in cat.DQ.node.items():
        comps[n] = u.components[D.legs[i].omap[k]]
    return tuple(comps)


# -------------------------------------------------------------- combined


@dataclass
class SvkReport:
    direct: UniversalityVerdict
    dual: DualReport
    cocone_ok: bool

    @property
    def verdict(self) -> bool:
        return self.cocone_ok and self.direct.verdict and self.dual.verdict

    @property
    def routes_agree(self) -> bool:
        return self.direct.verdict == self.dual.verdict

    def summary(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "cocone_cocycle": "pass" if self.cocone_ok else "fail",
            "routes_agree": self.routes_agree,
            "direct": self.direct.summary(),
            "dual": self.dual.summary(),
        }


def verify_seifert_van_kampen(s: SvkScenario, budget=None, corrupt: bool = False) -> SvkReport:
    c = canonical_cocone(s)
    if corrupt:
        c = corrupt_cocone(c)
    direct = verify_2colim_universal(c, s.tests, budget)
    dual = verify_costack_dual(s, budget=budget)
    return SvkReport(direct, dual, c.cocycle_ok)
