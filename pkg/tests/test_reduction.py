import random

from hypothesis import given, strategies as st
import pytest

from webpi.congruence import normalize, split_region
from webpi.gen import random_process, variant
from webpi.reduction import StaleRedex, apply, fire, redexes, step_all
from webpi.syntax import anonymous_unit, parse, pretty
from webpi.terms import Name, Output, Par, Workunit, free_names

from conftest import terms


def N(src):
    return normalize(parse(src))


def nf_text(src):
    return pretty(N(src).term)


def rules(src):
    return [r.rule for r in redexes(N(src))]


def test_com_minimal():
    nf = N("x!(v) | x?(u).u!()")
    (r,) = redexes(nf)
    assert r.rule == "COM" and r.subject == Name("x")
    assert apply(nf, r) == N("v!()")


def test_rep_minimal():
    nf = N("x!(v) | *x?(u).u!()")
    (r,) = redexes(nf)
    assert r.rule == "REP"
    assert apply(nf, r) == N("v!() | *x?(u).u!()")


def test_fail_minimal():
    nf = N("x!() | unit x { b?(u).0 ; c!() }")
    (r,) = redexes(nf)
    assert r.rule == "FAIL"
    # <c!() ; 0> floats c!() out and the committed unit disappears
    assert pretty(apply(nf, r).term) == "c!()"


def test_fail_result_is_restricted_handler_unit():
    nf = N("x!() | unit x { b?().0 ; c?().d!() }")
    (r,) = redexes(nf)
    out = apply(nf, r)
    assert out == N("unit { c?().d!() ; 0 }")
    binders, comps = split_region(out.term)
    (w,) = comps
    assert isinstance(w, Workunit) and w.unit in binders and w.unit.reserved


def test_com_crosses_unit_boundary():
    nf = N("x!(v) | unit w { x?(u).u!() ; q!() }")
    (r,) = redexes(nf)
    assert r.rule == "COM" and len(r.target_locus) == 2
    # the continuation lands in the body, floats out, and the unit commits
    assert pretty(apply(nf, r).term) == "v!()"


def test_fail_blocked_by_replication_in_body():
    assert rules("x!() | unit x { *b?(u).0 ; q!() }") == []


def test_fail_needs_empty_output():
    assert rules("x!(v) | unit x { b?(u).0 ; q!() }") == []


def test_arity_mismatch_is_not_a_redex():
    assert rules("x!(v) | x?().0") == []
    assert rules("x!() | x?(u).0") == []


def test_step_all_two_receivers():
    got = [pretty(s.term) for s in step_all(N("x!() | x?().p!() | x?().q!()"))]
    want = sorted([N("p!() | x?().q!()"), N("q!() | x?().p!()")],
                  key=lambda n: n.canonical_key)
    assert got == [pretty(n.term) for n in want]


def test_race_between_com_and_fail():
    nf = N("x!() | unit x { x?().u!() ; q!() }")
    assert sorted(rules("x!() | unit x { x?().u!() ; q!() }")) == ["COM", "FAIL"]
    assert {pretty(s.term) for s in step_all(nf)} == {"u!()", "q!()"}


def test_step_all_nil():
    assert step_all(N("0")) == []


def test_stale_redex():
    nf = N("x!(v) | x?(u).u!()")
    (r,) = redexes(nf)
    with pytest.raises(StaleRedex):
        apply(apply(nf, r), r)


def test_restricted_channel_still_communicates():
    nf = N("new x in (x!(v) | x?(u).u!())")
    (r,) = redexes(nf)
    assert apply(nf, r) == N("v!()")


def test_communication_extrudes_private_name():
    nf = N("a?(u).u!() | new c in (a!(c) | c?().d!())")
    (r,) = redexes(nf)
    out = apply(nf, r)
    assert out == N("new c in (c!() | c?().d!())")
    (r2,) = redexes(out)
    assert apply(out, r2) == N("d!()")


def test_step_reports_observations():
    nf = N("x!() | unit x { b?(u).0 ; refund!() | notify!() }")
    s = fire(nf, redexes(nf)[0])
    assert s.produced == {Name("refund"), Name("notify")}
    assert s.consumed == {Name("x")}
    hidden = N("new x in (x!() | unit x { b?(u).0 ; c!() })")
    assert fire(hidden, redexes(hidden)[0]).consumed == frozenset()


@given(terms())
def test_free_name_monotonicity(p):
    nf = normalize(p)
    for s in step_all(nf):
        assert free_names(s.term) <= free_names(nf.term)


@given(terms(), st.randoms(use_true_random=False))
def test_closure_under_congruence(p, rng):
    q = variant(p, rng, steps=5)
    k1 = [s.canonical_key for s in step_all(normalize(p))]
    k2 = [s.canonical_key for s in step_all(normalize(q))]
    assert k1 == k2


def _top_empty_outputs(nf, x):
    binders, comps = split_region(nf.term)
    return sum(1 for c in comps if isinstance(c, Output) and c.subject == x and not c.args)


@given(terms(16))
def test_fail_consumes_the_abort(p):
    nf = normalize(p)
    for r in redexes(nf):
        if r.rule != "FAIL":
            continue
        x = r.subject
        handler = split_region(nf.term)[1][r.target_locus[0]].handler
        emitted = _top_empty_outputs(normalize(handler), x)
        after = apply(nf, r)
        assert _top_empty_outputs(after, x) == _top_empty_outputs(nf, x) - 1 + emitted


def test_fail_consumes_the_abort_example():
    nf = N("x!() | x!() | unit x { b?().0 ; c!() }")
    (r,) = [r for r in redexes(nf) if r.rule == "FAIL"][:1]
    assert _top_empty_outputs(apply(nf, r), Name("x")) == 1


def _fail_targets(nf):
    comps = split_region(nf.term)[1]
    return [comps[r.target_locus[0]].unit for r in redexes(nf) if r.rule == "FAIL"]


@given(terms(16))
def test_handler_unit_is_immune(p):
    nf = normalize(p)
    for r in redexes(nf):
        if r.rule == "FAIL":
            after = apply(nf, r)
            assert not any(u.reserved for u in _fail_targets(after))


@given(terms(6), terms(4), st.sampled_from(["a", "b", "c", "x", "y"]))
def test_shortcut_unit_is_immune(body, handler, name):
    a = Name(name)
    if a not in free_names(body):
        body = Par((body, Output(a)))
    nf = normalize(Par((Output(a), anonymous_unit(body, handler))))
    assert not any(u.reserved for u in _fail_targets(nf))


@given(terms())
def test_no_redex_targets_committed_unit(p):
    nf = normalize(p)
    comps = split_region(nf.term)[1]
    for r in redexes(nf):
        t = comps[r.target_locus[0]]
        if isinstance(t, Workunit):
            assert pretty(t.body) != "0"
