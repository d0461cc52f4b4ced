import io
import json
from importlib import resources

import jsonschema
import pytest

from webpi.cli import main

REPORT_SCHEMA = json.loads(
    resources.files("webpi").joinpath("schemas/run_report.schema.json").read_text())
GRAPH_SCHEMA = json.loads(
    resources.files("webpi").joinpath("schemas/graph.schema.json").read_text())


@pytest.fixture
def wpi(tmp_path):
    def make(text, name="t.wpi"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return make


def run_cli(*argv, stdin=""):
    out = io.StringIO()
    code = main(list(argv), out=out, inp=io.StringIO(stdin))
    return code, out.getvalue()


def test_check_ok(wpi):
    code, text = run_cli("check", wpi("x!(v) | x?(u).u!()"))
    assert code == 0 and text.strip().endswith(": ok")


def test_check_violation(wpi):
    code, text = run_cli("check", wpi("x?(u, u).0"))
    assert code == 1 and "duplicate parameter" in text


def test_check_arity_warning_is_not_failure(wpi):
    code, text = run_cli("check", wpi("x!() | x?(u).0"))
    assert code == 0 and "warning: name x used with arities [0, 1]" in text


def test_parse_error_reports_location(wpi):
    code, text = run_cli("check", wpi("x!(v) |\n  | y!()"))
    assert code == 2 and ":2:3:" in text


def test_missing_file():
    code, text = run_cli("check", "/nonexistent/file.wpi")
    assert code == 2 and "error:" in text


def test_nf(wpi):
    code, text = run_cli("nf", wpi("unit a { z!() | p?(u).0 ; q!() }"))
    assert code == 0 and text.strip() == "z!() | unit a { p?(u).0 ; q!() }"


def test_nf_trace(wpi):
    code, text = run_cli("nf", "--trace", wpi("unit a { 0 ; q!() } | new u in 0"))
    lines = text.strip().splitlines()
    assert code == 0 and lines[0] == "0"
    assert any(l.startswith("unit-commit:") for l in lines[1:])
    assert any(l.startswith("scope-nil:") or l.startswith("restriction-gc:") for l in lines[1:])


def test_eq(wpi):
    a = wpi("new x in (x!() | y?().0)", "a.wpi")
    b = wpi("y?().0 | new z in z!()", "b.wpi")
    c = wpi("y?().0 | z!()", "c.wpi")
    assert run_cli("eq", a, b) == (0, "congruent\n")
    assert run_cli("eq", a, c) == (1, "not congruent\n")


def test_eq_floating(wpi):
    a = wpi("unit a { w!() | p?().0 ; q!() }", "a.wpi")
    b = wpi("w!() | unit a { p?().0 ; q!() }", "b.wpi")
    assert run_cli("eq", a, b)[0] == 0


def test_run_first(wpi):
    code, text = run_cli("run", wpi("x!(v) | x?(u).u!() | v?().0"))
    assert code == 0
    assert "steps: 2" in text and "COM=2" in text and "classification: committed" in text


def test_run_json_schema_and_determinism(wpi):
    f = wpi("a!() | a!() | *a?().b!() | b?().0 + b?().c!()")
    c1, t1 = run_cli("run", f, "--strategy", "random", "--seed", "7", "--json")
    c2, t2 = run_cli("run", f, "--strategy", "random", "--seed", "7", "--json")
    assert c1 == c2 == 0 and t1 == t2
    report = json.loads(t1)
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["seed"] == 7 and report["strategy"] == "random"
    assert report["steps"] == sum(report["histogram"].values())


def test_run_budget(wpi):
    code, text = run_cli("run", wpi("x!() | x?().0"), "--max-steps", "0", "--json")
    report = json.loads(text)
    assert code == 0 and report["classification"] == "budget-exhausted" and report["steps"] == 0


def test_step_interactive(wpi):
    f = wpi("x!() | x?().p!() | x?().q!()")
    code, text = run_cli("step", f, stdin="9\nfoo\n1\n")
    assert code == 0
    assert "no redex '9'" in text and "no redex 'foo'" in text
    assert "terminal: stuck" in text


def test_step_quit(wpi):
    code, text = run_cli("step", wpi("x!() | x?().0"), stdin="q\n")
    assert code == 0 and "terminal" not in text
    code, _ = run_cli("step", wpi("x!() | x?().0"), stdin="")
    assert code == 0


def test_explore_requirements(wpi):
    ok = wpi("x!() | x?().0")
    assert run_cli("explore", ok, "--require", "committed")[0] == 0
    assert run_cli("explore", ok, "--require", "observed:x")[0] == 0
    bad = wpi("x!() | x?().y!()", "bad.wpi")
    code, text = run_cli("explore", bad, "--require", "no-stuck")
    assert code == 1 and "counterexample (1 steps)" in text and "--COM-->" in text


def test_explore_unknown_requirement(wpi):
    code, text = run_cli("explore", wpi("0"), "--require", "sometimes")
    assert code == 2 and "unknown requirement" in text


def test_explore_bad_limit(wpi):
    assert run_cli("explore", wpi("0"), "--max-states", "0")[0] == 2


def test_explore_truncated_is_inconclusive(wpi):
    f = wpi("*a?().(a!() | a!()) | a!()")
    code, text = run_cli("explore", f, "--max-states", "5", "--require", "committed")
    assert code == 3 and "committed: inconclusive" in text
    assert run_cli("explore", f, "--max-states", "5")[0] == 3


def test_explore_exports(wpi, tmp_path):
    f = wpi("x!() | x?().0")
    dot, js = tmp_path / "g.dot", tmp_path / "g.json"
    code, text = run_cli("explore", f, "--dot", str(dot), "--json", str(js))
    assert code == 0 and "states: 2  edges: 1" in text
    assert 'label="COM"' in dot.read_text()
    jsonschema.validate(json.loads(js.read_text()), GRAPH_SCHEMA)


def test_explore_workers(wpi):
    f = wpi("x!() | x?().p!() | x?().q!() | p?().0")
    assert run_cli("explore", f, "--workers", "2") == run_cli("explore", f)
