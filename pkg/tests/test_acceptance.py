"""Acceptance criteria, one check per criterion.

Run under pytest (the summary lists one PASS/FAIL line per criterion) or
directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import contextlib
import io
import itertools
import json
import random
import sys
import tempfile
import time
from pathlib import Path

from groupoid_descent.cli import main as cli_main
from groupoid_descent.fincat import preset_groupoid
from groupoid_descent.galois import action_presentation, detect_mono_epi
from groupoid_descent.groups import conjugate, preset_group
from groupoid_descent.gset import (
    action_from_types,
    are_isomorphic,
    classify_action,
    coproduct,
    orbit_decomposition,
    random_gmap,
    transitive_types,
)

PRESETS = ["C1", "C2", "C3", "C4", "V4", "S3", "C2+C3"]
RESULTS: list[str] = []


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)


def cli(*argv) -> tuple[int, dict]:
    """Run the command line and read back its JSON report."""
    with tempfile.TemporaryDirectory() as d:
        out = Path(d) / "report.json"
        with contextlib.redirect_stdout(io.StringIO()):
            code = cli_main([*argv, "--format", "json", "--out", str(out)])
        return code, json.loads(out.read_text())


def scenario_file(obj: dict) -> str:
    f = tempfile.NamedTemporaryFile("w", suffix=".json", delete=False)
    json.dump(obj, f)
    f.close()
    return f.name


def s3_transitive_oracle() -> int:
    """Subgroups of S3 up to conjugacy, by brute-force subset search."""
    G = preset_group("S3")
    subs = [
        frozenset(S) for r in range(1, 7) for S in itertools.combinations(G.elements, r)
        if 0 in S and all(G.mul[a][b] in S for a in S for b in S)
    ]
    classes = {frozenset(conjugate(G, H, g) for g in G.elements) for H in subs}
    return len(classes)


def test_criterion_1_reconstruction():
    ok, notes = True, []
    for name in PRESETS:
        t = time.perf_counter()
        code, rep = cli("reconstruct", name)
        dt = time.perf_counter() - t
        good = code == 0 and rep["checks"]["equivalent_to_input"]["verdict"] == "equivalence" and dt < 60
        ok &= good
        notes.append(f"{name}:{'ok' if good else 'bad'}({dt:.1f}s)")
    oracle = s3_transitive_oracle()
    _, rep = cli("reconstruct", "S3")
    ok &= oracle == 4 == rep["checks"]["transitive_types"]
    record(1, ok, f"reconstruction {' '.join(notes)}; S3 transitive types {oracle}")
    assert ok


STACK_SCENARIOS = [("C2", 4), ("C3", 4), ("S3", 6)]


def _descend(name, bound):
    path = scenario_file({"version": 1, "groupoid": name, "base": "point", "covering": ["regular"]})
    t = time.perf_counter()
    code, rep = cli("descend", path, "--bound", str(bound), "--samples", "200", "--seed", "0")
    return code, rep, time.perf_counter() - t


def test_criterion_2_stack_property():
    ok, notes = True, []
    for name, bound in STACK_SCENARIOS:
        code, rep, dt = _descend(name, bound)
        c = rep["checks"]
        good = (
            code == 0 and c["glued"] == c["descent_data"] > 0 and c["unique_gluing"]
            and c["hom_bijections"] == c["hom_pairs_checked"] and dt < 120
        )
        ok &= good
        notes.append(f"{name}@{bound}: {c['glued']}/{c['descent_data']} glued ({dt:.1f}s)")
    record(2, ok, "stack property " + "; ".join(notes))
    assert ok


def test_criterion_3_galois_two_limit():
    ok, notes = True, []
    for name, bound in STACK_SCENARIOS:
        _, rep, _ = _descend(name, bound)
        g, p = rep["checks"]["galois_axioms"], rep["checks"]["projections_exact"]
        fails = sum(a["failures"] for a in g["axioms"].values())
        checked = sum(a["checked"] for a in g["axioms"].values())
        good = g["verdict"] and p["verdict"] and fails == 0 and checked == 200
        ok &= good
        notes.append(f"{name}: {checked} samples, {fails} failures, projections {'ok' if p['verdict'] else 'bad'}")
    record(3, ok, "Galois axioms on descent " + "; ".join(notes))
    assert ok


def test_criterion_4_van_kampen():
    scenarios = {
        "a trivial": {"version": 1, "groupoid": "C2", "base": "point", "covering": ["identity"]},
        "b C2 torsor": {"version": 1, "groupoid": "C2", "base": "point", "covering": ["regular"]},
        "c S3 torsor": {"version": 1, "groupoid": "S3", "base": "point", "covering": ["regular"]},
        "d split": {"version": 1, "groupoid": {"coproduct": ["C2", "C3"]}, "base": "point",
                    "covering": ["components"]},
    }
    ok, notes, start = True, [], time.perf_counter()
    for label, raw in scenarios.items():
        code, rep = cli("vankampen", scenario_file(raw), "--tests", "terminal,discrete-2,C2,C3,S3,apex")
        c = rep["checks"]
        good = (
            code == 0 and c["routes_agree"] and c["direct"]["verdict"] == "pass"
            and c["dual"]["verdict"] == "pass" and c["cocone_cocycle"] == "pass"
        )
        ok &= good
        notes.append(f"({label}) {'ok' if good else 'bad'}")
    total = time.perf_counter() - start
    ok &= total < 600
    record(4, ok, f"van Kampen both routes {' '.join(notes)} in {total:.1f}s")
    assert ok


def test_criterion_5_main_lemma():
    code, rep = cli("split", "C2+C3")
    c = rep["checks"]
    ok = (
        code == 0 and c["d"] == 2 and c["reindex_exact"] and c["reindex"] == [0, 1]
        and c["xi_equivalence"]["verdict"] == "equivalence" and c["coproduct_checks"]
    )
    record(5, ok, f"split d={c['d']} reindex={c['reindex']} xi {c['xi_equivalence']['verdict']}")
    assert ok


def test_criterion_6_mono_epi_and_decomposition():
    mismatches, decomposition_errors = 0, 0
    for name in PRESETS:
        G = preset_groupoid(name)
        P = action_presentation(G, bound=4)
        rng = random.Random(f"acceptance-{name}")
        pool = P.model.small
        seen = 0
        while seen < 100:
            X, Y = rng.choice(pool), rng.choice(pool)
            u = random_gmap(X, Y, rng)
            if u is None:
                continue
            seen += 1
            got = detect_mono_epi(P.fibers, u, P.witness)
            inj = all(len(set(c)) == len(c) for c in u.components)
            surj = all(set(c) == set(range(Y.size(x))) for x, c in enumerate(u.components))
            mismatches += (got["mono"] != inj) + (got["strict_epi"] != surj)
        types = transitive_types(G)
        for _ in range(100):
            X = action_from_types(G, [rng.choice(types) for _ in range(rng.randint(0, 3))])
            parts, iso = orbit_decomposition(X)
            C, _ = coproduct(parts, G)
            again = [q for p in parts for q in orbit_decomposition(p)[0]]
            ok = (
                iso.is_iso() and classify_action(C) == classify_action(X) and len(again) == len(parts)
                and all(are_isomorphic(a, b) for a, b in zip(again, parts))
            )
            decomposition_errors += not ok
    ok = mismatches == 0 and decomposition_errors == 0
    record(6, ok, f"mono/epi mismatches {mismatches}, decomposition errors {decomposition_errors}")
    assert ok


def test_criterion_7_negative_controls():
    code1, rep1 = cli("descend", "C2", "--corrupt-cocycle")
    cocycle = code1 != 0 and rep1["checks"]["corrupted_datum"]["rejected_with"] == "CocycleViolation"
    code2, rep2 = cli("vankampen", "C2", "--corrupt-cocone")
    failed = [t for t, r in rep2["checks"]["direct"]["tests"].items() if r["verdict"] == "fail"]
    cocone = code2 != 0 and len(failed) >= 1
    code3, rep3 = cli("equiv", "C4", "--other", "V4")
    refuted = code3 != 0 and rep3["checks"]["result"]["verdict"] == "refuted"
    ok = cocycle and cocone and refuted
    record(7, ok, f"corrupt cocycle rejected={cocycle}, corrupt cocone fails {failed}, BC4 vs BV4 refuted={refuted}")
    assert ok


def test_criterion_8_unique_exact_functor():
    from groupoid_descent.galois import exact_functors_from_fsets

    counts = {name: exact_functors_from_fsets(preset_groupoid(name))["classes"] for name in PRESETS}
    ok = all(v == 1 for v in counts.values())
    record(8, ok, f"exact functors from finite sets up to iso {counts}")
    assert ok


if __name__ == "__main__":
    failures = 0
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]:
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
