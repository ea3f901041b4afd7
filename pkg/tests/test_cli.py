from __future__ import annotations

import json

import pytest

from groupoid_descent.cli import (
    EXIT_BUDGET,
    EXIT_FAIL,
    EXIT_INVALID,
    EXIT_PASS,
    build_parser,
    build_scenario,
    main,
)
from groupoid_descent.errors import ValidationError


def write(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return str(p)


def run_json(argv, capsys):
    code = main(argv + ["--format", "json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_torsor_scenario_file(tmp_path, capsys):
    path = write(tmp_path, {"version": 1, "groupoid": "C2", "base": "point", "covering": ["regular"]})
    code, rep = run_json(["vankampen", path], capsys)
    assert code == EXIT_PASS and rep["verdict"] == "pass"
    assert rep["checks"]["routes_agree"] is True


def test_reports_are_byte_identical(capsys):
    main(["descend", "C3", "--format", "json", "--seed", "5", "--samples", "30"])
    first = capsys.readouterr().out
    main(["descend", "C3", "--format", "json", "--seed", "5", "--samples", "30"])
    assert capsys.readouterr().out == first
    assert "elapsed" not in first


def test_reconstruct_s3(capsys):
    code, rep = run_json(["reconstruct", "S3"], capsys)
    assert code == EXIT_PASS
    assert rep["checks"]["transitive_types"] == 4
    assert rep["checks"]["equivalent_to_input"]["verdict"] == "equivalence"


def test_corrupt_cocycle_fails(capsys):
    code, rep = run_json(["descend", "C2", "--corrupt-cocycle"], capsys)
    assert code == EXIT_FAIL and rep["verdict"] == "fail"
    assert rep["checks"]["corrupted_datum"]["rejected_with"] == "CocycleViolation"
    code, _ = run_json(["glue", "C3", "--corrupt-cocycle"], capsys)
    assert code == EXIT_FAIL


def test_corrupt_cocone_fails(capsys):
    code, rep = run_json(["vankampen", "C2", "--corrupt-cocone"], capsys)
    assert code == EXIT_FAIL
    assert rep["checks"]["cocone_cocycle"] == "fail"


def test_equiv_refutes_c4_v4(capsys):
    code, rep = run_json(["equiv", "C4", "--other", "V4"], capsys)
    assert code == EXIT_FAIL and rep["checks"]["result"]["verdict"] == "refuted"
    code, _ = run_json(["equiv", "C2+C3", "--other", "C3+C2"], capsys)
    assert code == EXIT_PASS


def test_split_and_orbits(capsys):
    code, rep = run_json(["split", "C2+C3"], capsys)
    assert code == EXIT_PASS and rep["checks"]["d"] == 2
    code, rep = run_json(["orbits", "S3"], capsys)
    assert rep["checks"]["transitive_types"] == 4


def test_identity_law_scenario_is_rejected(tmp_path, capsys):
    path = write(tmp_path, {
        "version": 1,
        "groupoid": {
            "objects": 1, "morphisms": [[0, 0, 0], [1, 0, 0]], "identity": [0],
            "compose": [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 1]],
        },
    })
    assert main(["validate", path]) == EXIT_INVALID
    assert "identity law" in capsys.readouterr().err


def test_non_surjective_covering_is_rejected(tmp_path, capsys):
    path = write(tmp_path, {
        "version": 1, "groupoid": "C2", "base": {"types": [1, 1]},
        "covering": [{"source": "point", "map": [[0]]}],
    })
    assert main(["validate", path]) == EXIT_INVALID
    assert "NotJointlySurjective" in capsys.readouterr().err


@pytest.mark.parametrize("raw", [
    {"version": 1, "groupoid": "C2", "colour": "red"},
    {"version": 2, "groupoid": "C2"},
    {"version": 1},
    {"version": 1, "groupoid": "C7"},
    {"version": 1, "groupoid": "C2", "bound": -1},
])
def test_invalid_scenarios(tmp_path, raw, capsys):
    assert main(["validate", write(tmp_path, raw)]) == EXIT_INVALID


def test_unparseable_file(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "{not json")]) == EXIT_INVALID
    assert "line 1" in capsys.readouterr().err


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate", "C2"])
    assert info.value.code == 2


def test_budget_exceeded_exit(tmp_path, capsys):
    path = write(tmp_path, {"version": 1, "groupoid": "S3", "budget": 50})
    code, rep = run_json(["reconstruct", path], capsys)
    assert code == EXIT_BUDGET and rep["verdict"] == "budget-exceeded"


def test_out_file_and_witnesses(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["equiv", "C2", "--other", "C2", "--format", "json", "--out", str(out), "--witnesses", "full"])
    assert code == EXIT_PASS
    rep = json.loads(out.read_text())
    assert rep["witnesses"]["equivalence"]["forward"]["objects"] == [0]
    assert "report written" in capsys.readouterr().out


def test_jobs_default_from_environment(monkeypatch):
    monkeypatch.setenv("GROUPOID_DESCENT_JOBS", "3")
    args = build_parser().parse_args(["validate", "C2"])
    assert args.jobs == 3


def test_parallel_vankampen_matches_serial(capsys):
    main(["vankampen", "C2", "--format", "json", "--jobs", "1"])
    serial = capsys.readouterr().out
    main(["vankampen", "C2", "--format", "json", "--jobs", "2"])
    assert capsys.readouterr().out == serial


def test_scenario_tests_field():
    s = build_scenario({"version": 1, "groupoid": "C2", "tests": ["terminal", "apex"]})
    assert [name for name, _ in s.tests] == ["terminal", "apex"]
    with pytest.raises(ValidationError):
        build_scenario({"version": 1, "groupoid": "C2", "tests": [3]})


def test_text_report(capsys):
    assert main(["validate", "C2+C3"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert out.startswith("validate: PASS") and "components: 2" in out


def test_parse_scenario_preset_name():
    from groupoid_descent.cli import parse_scenario

    s = parse_scenario("C2")
    assert s.group.n_morphisms == 2 and s.covering_kind == "regular"
