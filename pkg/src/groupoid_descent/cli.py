"""Command-line front end: scenario files, subcommands and reports.

Exit status: 0 pass, 1 fail, 2 usage error, 3 budget exceeded,
4 scenario parse or validation error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import (
    BudgetExceeded,
    CocycleViolation,
    GroupoidDescentError,
    LawViolation,
    MalformedTable,
    NotJointlySurjective,
    ParseError,
    UnknownPreset,
    ValidationError,
)
from .fincat import (
    FiniteGroupoid,
    as_groupoid,
    connected_components,
    groupoids_equivalent,
    preset_groupoid,
    validate_category,
)
from .search import Budget

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET, EXIT_INVALID = 0, 1, 2, 3, 4
REPORT_SCHEMA = 1
SCENARIO_FIELDS = {
    "version", "groupoid", "base", "covering", "bound", "seed", "samples", "tests",
    "other_groupoid", "budget",
}
COMMANDS = ("validate", "orbits", "split", "reconstruct", "descend", "glue", "vankampen", "equiv")


# ---------------------------------------------------------------- scenarios


@dataclass
class Scenario:
    raw: dict
    group: FiniteGroupoid
    base: Any
    covering: list
    covering_kind: str | None
    bound: int | None = None
    seed: int = 0
    samples: int = 200
    tests: list | None = None
    other: FiniteGroupoid | None = None
    budget: int = 10**7

    @property
    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_scenario(spec: str) -> dict:
    """A scenario file path, or a bare preset name."""
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ParseError(f"{spec}: {exc}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{spec}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ValidationError(f"{spec}: top level must be an object")
        return raw
    return {"version": 1, "groupoid": spec}


def parse_groupoid(spec, where: str = "groupoid") -> FiniteGroupoid:
    if isinstance(spec, str):
        return preset_groupoid(spec)
    if isinstance(spec, dict) and set(spec) == {"coproduct"}:
        from .fincat import coproduct_groupoid

        parts = spec["coproduct"]
        if not isinstance(parts, list) or not parts:
            raise ValidationError(f"{where}.coproduct: expected a non-empty list")
        return coproduct_groupoid(
            [parse_groupoid(p, f"{where}.coproduct[{n}]") for n, p in enumerate(parts)],
            name="+".join(p if isinstance(p, str) else "?" for p in parts),
        )
    if isinstance(spec, dict):
        try:
            return as_groupoid(validate_category(spec))
        except LawViolation as exc:
            raise ValidationError(f"{where}: {exc.law}: {exc}") from None
        except MalformedTable as exc:
            raise ValidationError(f"{where}: {exc}") from None
    raise ValidationError(f"{where}: expected a preset name, a coproduct or explicit tables")


def parse_action(G: FiniteGroupoid, spec, where: str = "base"):
    from .gset import (
        action_from_types,
        initial,
        make_action,
        terminal,
        transitive_types,
    )

    if spec in (None, "point"):
        return terminal(G)
    if spec == "empty":
        return initial(G)
    if spec == "regular":
        return action_from_types(G, [t for t in transitive_types(G) if len(t.subgroup) == 1])
    if isinstance(spec, dict) and set(spec) == {"types"}:
        types = transitive_types(G)
        try:
            return action_from_types(G, [types[n] for n in spec["types"]])
        except (IndexError, TypeError):
            raise ValidationError(f"{where}.types: indices must lie in 0..{len(types) - 1}") from None
    if isinstance(spec, dict) and set(spec) == {"carrier", "act"}:
        try:
            return make_action(G, spec["carrier"], spec["act"])
        except (LawViolation, IndexError, TypeError, ValueError) as exc:
            raise ValidationError(f"{where}: {exc}") from None
    raise ValidationError(f"{where}: unrecognised action description {spec!r}")


def parse_covering(G, U, spec) -> tuple[list, str | None]:
    from .gset import make_map
    from .vankampen import component_covering, regular_covering

    spec = ["regular"] if spec is None else spec
    if isinstance(spec, str):
        spec = [spec]
    if not isinstance(spec, list):
        raise ValidationError("covering: expected a list")
    maps, kinds = [], set()
    for n, entry in enumerate(spec):
        if entry == "regular":
            maps += regular_covering(G, U)
        elif entry == "identity":
            from .gset import identity_map

            maps.append(identity_map(U))
        elif entry == "components":
            maps += component_covering(U)
        elif isinstance(entry, dict) and set(entry) == {"source", "map"}:
            X = parse_action(G, entry["source"], f"covering[{n}].source")
            try:
                maps.append(make_map(X, U, entry["map"]))
            except (LawViolation, IndexError, TypeError) as exc:
                raise ValidationError(f"covering[{n}]: {exc}") from None
            entry = "explicit"
        else:
            raise ValidationError(f"covering[{n}]: unrecognised entry {entry!r}")
        kinds.add(entry)
    from .descent import check_jointly_surjective

    check_jointly_surjective(U, maps)
    kind = kinds.pop() if len(kinds) == 1 else None
    return maps, kind


def parse_tests(spec) -> list:
    if spec is None:
        return None
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s]
    out = []
    for n, t in enumerate(spec):
        if t == "apex":
            out.append(("apex", None))
        elif isinstance(t, str):
            out.append((t, preset_groupoid(t)))
        elif isinstance(t, dict):
            try:
                C = validate_category(t)
            except (LawViolation, MalformedTable) as exc:
                raise ValidationError(f"tests[{n}]: {exc}") from None
            out.append((t.get("name", f"explicit-{n}"), C))
        else:
            raise ValidationError(f"tests[{n}]: expected a preset name or explicit tables")
    return out


def build_scenario(raw: dict) -> Scenario:
    unknown = set(raw) - SCENARIO_FIELDS
    if unknown:
        raise ValidationError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if raw.get("version") != 1:
        raise ValidationError("version: only version 1 is supported")
    if "groupoid" not in raw:
        raise ValidationError("groupoid: field is required")
    for key in ("bound", "seed", "samples", "budget"):
        if key in raw and (not isinstance(raw[key], int) or raw[key] < 0):
            raise ValidationError(f"{key}: expected a non-negative integer")
    G = parse_groupoid(raw["groupoid"])
    U = parse_action(G, raw.get("base"))
    covering, kind = parse_covering(G, U, raw.get("covering"))
    other = parse_groupoid(raw["other_groupoid"], "other_groupoid") if "other_groupoid" in raw else None
    return Scenario(
        raw, G, U, covering, kind,
        bound=raw.get("bound"), seed=raw.get("seed", 0), samples=raw.get("samples", 200),
        tests=parse_tests(raw.get("tests")), other=other, budget=raw.get("budget", 10**7),
    )


def parse_scenario(spec: str) -> Scenario:
    """Load and validate a scenario file (or preset name) in one step."""
    return build_scenario(load_scenario(spec))


# ---------------------------------------------------------------- reports


@dataclass
class Report:
    command: str
    scenario: Scenario
    verdict: str  # pass | fail | budget-exceeded
    checks: dict
    seed: int
    bounds: dict
    witnesses: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def as_json(self) -> dict:
        out = {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "scenario_digest": self.scenario.digest,
            "verdict": self.verdict,
            "seed": self.seed,
            "bounds": self.bounds,
            "checks": self.checks,
        }
        if self.witnesses:
            out["witnesses"] = self.witnesses
        return out

    def as_text(self) -> str:
        lines = [
            f"{self.command}: {self.verdict.upper()}",
            f"  scenario {self.scenario.digest}  seed {self.seed}  bounds {_inline(self.bounds)}",
        ]
        lines += _text_lines(self.checks, 1)
        if self.witnesses:
            lines.append("  witnesses:")
            lines += _text_lines(self.witnesses, 2)
        lines.append(f"  elapsed {self.elapsed:.2f}s")
        return "\n".join(lines)


def _inline(d: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in d.items()) or "-"


def _text_lines(d: dict, depth: int) -> list:
    pad = "  " * depth
    out = []
    for k, v in d.items():
        if isinstance(v, dict):
            out.append(f"{pad}{k}:")
            out += _text_lines(v, depth + 1)
        elif isinstance(v, list) and len(v) > 8:
            out.append(f"{pad}{k}: [{len(v)} entries]")
        else:
            out.append(f"{pad}{k}: {v}")
    return out


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def _jsonable(x):
    return json.loads(json.dumps(x, default=repr))


def _functor_tables(F) -> dict:
    omap = getattr(F, "omap", None)
    mmap = getattr(F, "mmap", None)
    if omap is None:
        return {"functor": repr(F)}
    return {"objects": list(omap), "morphisms": list(mmap)}


def _witness_dump(w) -> dict:
    if not w:
        return w.summary()
    return {
        "forward": _functor_tables(w.forward),
        "essential": {repr(t): [repr(a), repr(iso)] for t, (a, iso) in w.essential.items()},
        "hom_tables": {repr(k): repr(v) for k, v in w.hom_tables.items()},
    }


# ---------------------------------------------------------------- commands


def cmd_validate(s: Scenario, args) -> tuple[bool, dict, dict]:
    G = s.group
    G.check_laws()
    for u in s.covering:
        u.check_laws()
    checks = {
        "groupoid": {
            "objects": G.n_objects,
            "morphisms": G.n_morphisms,
            "components": len(connected_components(G)),
        },
        "base_elements": s.base.total_size,
        "covering_pieces": len(s.covering),
        "jointly_surjective": True,
    }
    return True, checks, {}


def cmd_orbits(s: Scenario, args):
    from .gset import classify_action, orbits, transitive_types

    types = transitive_types(s.group)
    checks = {
        "transitive_types": len(types),
        "types": [
            {"index": n, "component": t.component, "stabilizer_order": len(t.subgroup), "size": t.size}
            for n, t in enumerate(types)
        ],
        "base_orbits": len(orbits(s.base)),
        "base_decomposition": list(classify_action(s.base)),
    }
    return True, checks, {}


def cmd_split(s: Scenario, args):
    from .galois import action_presentation, component_split, terminal_decomposition

    bound = args.bound or s.bound or 4
    P = action_presentation(s.group, bound=bound)
    td = terminal_decomposition(P)
    split = component_split(P, td, bound=bound, budget=Budget(s.budget))
    reindex_exact = all(
        P.fibers[td.reindex[i]].size(e) == (1 if i == j else 0)
        for j, e in enumerate(td.summands) for i in range(td.d)
    )
    checks = {
        "d": td.d,
        "reindex": list(td.reindex),
        "reindex_exact": reindex_exact,
        "component_sizes": [len(c) for c in split.components],
        "coproduct_checks": all(split.coproduct_checks.values()),
        "xi_equivalence": split.witness.summary(),
    }
    wit = {"xi": _witness_dump(split.witness)} if args.witnesses == "full" else {}
    return bool(split) and reindex_exact, checks, wit


def cmd_reconstruct(s: Scenario, args):
    from .galois import action_presentation, fundamental_groupoid
    from .gset import transitive_types

    bound = args.bound or s.bound or 4
    P = action_presentation(s.group, bound=bound, all_fibers=True)
    pi1 = fundamental_groupoid(P, Budget(s.budget))
    eq = groupoids_equivalent(pi1.groupoid, s.group, Budget(s.budget))
    checks = {
        "transitive_types": len(transitive_types(s.group)),
        "fundamental_groupoid": pi1.summary(),
        "equivalent_to_input": eq.summary(),
    }
    wit = {"equivalence": _witness_dump(eq)} if args.witnesses == "full" else {}
    return bool(eq), checks, wit


def _diagram(s: Scenario, args):
    from .descent import build_cech_diagram

    bound = args.bound or s.bound or 4
    return build_cech_diagram(s.group, s.base, s.covering, bound=bound)


def _corrupted(D, budget):
    from .descent import DescentCategory, SetTarget, corrupt_datum

    for d in DescentCategory(D, SetTarget(), budget).objects():
        try:
            return corrupt_datum(D, d)
        except CocycleViolation:
            continue
    raise ValidationError("no datum of this scenario admits a cocycle-breaking corruption")


def cmd_descend(s: Scenario, args):
    from .descent import verify_stack

    D = _diagram(s, args)
    budget = Budget(s.budget)
    extra = [_corrupted(D, budget)] if args.corrupt_cocycle else []
    samples = args.samples if args.samples is not None else s.samples
    seed = args.seed if args.seed is not None else s.seed
    rep = verify_stack(D, samples=samples, seed=seed, budget=budget, extra_data=extra)
    checks = {"diagram": D.describe(), **rep.summary()}
    checks.pop("verdict")
    checks["cocycle_violations"] = [repr(v) for v in rep.violations[:10]]
    if args.corrupt_cocycle:
        errors = [e.get("error") for e in rep.essential if "error" in e]
        checks["corrupted_datum"] = {
            "rejected_with": "CocycleViolation" if errors else None,
            "message": errors[0] if errors else None,
        }
    wit = {"data": [e["datum"] for e in rep.essential]} if args.witnesses == "full" else {}
    return rep.verdict, checks, wit


def cmd_glue(s: Scenario, args):
    from .descent import DescentCategory, SetTarget, glue_descent_datum

    D = _diagram(s, args)
    budget = Budget(s.budget)
    cat = DescentCategory(D, SetTarget(), budget)
    data = list(cat.objects())
    if args.corrupt_cocycle:
        data.append(_corrupted(D, budget))
    glued, failures = 0, []
    for d in data:
        try:
            Y, iso = glue_descent_datum(D, d, cat)
            if iso.is_iso():
                glued += 1
            else:
                failures.append({"datum": repr(d), "error": "gluing map is not an isomorphism"})
        except CocycleViolation as exc:
            failures.append({"datum": repr(d), "error": f"CocycleViolation: {exc}"})
    checks = {
        "diagram": D.describe(),
        "descent_data": len(data),
        "glued": glued,
        "failures": failures[:10],
    }
    return glued == len(data), checks, {}


def _vk_scenario(s: Scenario, args):
    from .vankampen import SvkScenario, standard_tests

    tests = parse_tests(args.tests) if args.tests else (s.tests or standard_tests())
    fiber = args.bound or s.bound
    return SvkScenario(s.group, s.base, s.covering, tests, fiber, s.seed)


def _vk_one_test(raw: dict, test: str, bound, corrupt: bool, budget: int) -> dict:
    """Worker for ``--jobs``: rebuild everything from the raw scenario."""
    from .vankampen import canonical_cocone, corrupt_cocone, verify_2colim_universal

    s = build_scenario(raw)
    tests = parse_tests([test])
    c = canonical_cocone(_vk_scenario_plain(s, tests, bound))
    if corrupt:
        c = corrupt_cocone(c)
    return verify_2colim_universal(c, tests, Budget(budget)).results[test]


def _vk_scenario_plain(s, tests, bound):
    from .vankampen import SvkScenario

    return SvkScenario(s.group, s.base, s.covering, tests, bound, s.seed)


def cmd_vankampen(s: Scenario, args):
    from .vankampen import (
        SvkReport,
        UniversalityVerdict,
        canonical_cocone,
        corrupt_cocone,
        verify_2colim_universal,
        verify_costack_dual,
    )

    vs = _vk_scenario(s, args)
    c = canonical_cocone(vs)
    if args.corrupt_cocone:
        c = corrupt_cocone(c)
    names = [name for name, _ in vs.tests]
    presets_only = all(isinstance(t, str) for t in (s.raw.get("tests") or names))
    if args.jobs > 1 and len(names) > 1 and presets_only:
        # workers rebuild from the raw scenario; results are joined in suite order
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_vk_one_test, s.raw, t, vs.fiber, args.corrupt_cocone, s.budget)
                for t in names
            ]
            direct = UniversalityVerdict({t: f.result() for t, f in zip(names, futures)}, names)
    else:
        direct = verify_2colim_universal(c, vs.tests, Budget(s.budget))
    dual = verify_costack_dual(vs, budget=Budget(s.budget))
    rep = SvkReport(direct, dual, c.cocycle_ok)
    checks = rep.summary()
    checks.pop("verdict")
    checks["cocone_violations"] = [repr(v) for v in c.cocycle_violations[:10]]
    checks["apex"] = {
        "objects": c.apex.n_objects,
        "morphisms": c.apex.n_morphisms,
        "components": len(connected_components(c.apex)),
    }
    states = {r["verdict"] for r in direct.results.values()}
    if rep.verdict or "fail" in states or not dual.verdict or not c.cocycle_ok:
        return rep.verdict, checks, {}
    return "budget-exceeded", checks, {}


def cmd_equiv(s: Scenario, args):
    other = parse_groupoid(args.other, "--other") if args.other else s.other
    if other is None:
        raise ValidationError("equiv needs other_groupoid in the scenario or --other")
    eq = groupoids_equivalent(s.group, other, Budget(s.budget))
    checks = {"left": s.group.name, "right": other.name, "result": eq.summary()}
    wit = {"equivalence": _witness_dump(eq)} if args.witnesses == "full" else {}
    return bool(eq), checks, wit


HANDLERS = {
    "validate": cmd_validate,
    "orbits": cmd_orbits,
    "split": cmd_split,
    "reconstruct": cmd_reconstruct,
    "descend": cmd_descend,
    "glue": cmd_glue,
    "vankampen": cmd_vankampen,
    "equiv": cmd_equiv,
}


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="groupoid-descent",
        description="Finite descent, Galois reconstruction and van Kampen checks for groupoid actions.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("scenario", help="scenario JSON file or a preset name such as C2, S3, C2+C3")
    p.add_argument("--bound", type=int, help="fragment bound (fiber bound for vankampen)")
    p.add_argument("--seed", type=int, help="random seed for sampled checks")
    p.add_argument("--samples", type=int, help="number of sampled axiom checks")
    p.add_argument("--tests", help="comma-separated test categories for vankampen, e.g. terminal,C2,apex")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--witnesses", choices=("elided", "full"), default="elided")
    p.add_argument(
        "--jobs", type=int, default=int(os.environ.get("GROUPOID_DESCENT_JOBS", "1") or 1),
        help="worker processes for per-test checks (default from GROUPOID_DESCENT_JOBS)",
    )
    p.add_argument("--other", help="second groupoid for equiv (preset name)")
    p.add_argument("--corrupt-cocycle", action="store_true", help="add a cocycle-breaking datum (descend, glue)")
    p.add_argument("--corrupt-cocone", action="store_true", help="twist the canonical cocone (vankampen)")
    return p


def run(command: str, scenario: Scenario, args) -> tuple[Report, int]:
    start = time.perf_counter()
    seed = args.seed if args.seed is not None else scenario.seed
    bounds = {"bound": args.bound or scenario.bound, "budget": scenario.budget}
    try:
        ok, checks, wit = HANDLERS[command](scenario, args)
        if ok == "budget-exceeded":
            verdict, code = ok, EXIT_BUDGET
        else:
            verdict, code = _verdict(ok), (EXIT_PASS if ok else EXIT_FAIL)
    except BudgetExceeded as exc:
        checks, wit = {"error": f"BudgetExceeded: {exc}"}, {}
        verdict, code = "budget-exceeded", EXIT_BUDGET
    rep = Report(command, scenario, verdict, _jsonable(checks), seed, bounds, _jsonable(wit))
    rep.elapsed = time.perf_counter() - start
    return rep, code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        scenario = parse_scenario(args.scenario)
    except (ParseError, ValidationError, NotJointlySurjective, LawViolation, MalformedTable) as exc:
        kind = "unknown preset" if isinstance(exc, UnknownPreset) else type(exc).__name__
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        rep, code = run(args.command, scenario, args)
    except (ValidationError, GroupoidDescentError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID if isinstance(exc, ValidationError) else EXIT_FAIL
    text = (
        json.dumps(rep.as_json(), indent=2, sort_keys=True) + "\n"
        if args.format == "json" else rep.as_text() + "\n"
    )
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"{args.command}: {rep.verdict} (report written to {args.out})")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
