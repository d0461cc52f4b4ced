import random

from hypothesis import given, strategies as st
import pytest

from webpi.congruence import (
    AXIOMS, FuelExhausted, congruent, is_committed, nf_violations, normalize,
)
from webpi.gen import alpha_variant, random_process, variant
from webpi.syntax import parse, pretty
from webpi.terms import (
    NIL, Name, Output, Par, Restrict, Sum, Workunit, free_names, inp,
)

from conftest import terms


def nf(src):
    return pretty(normalize(parse(src)).term)


def test_committed_unit_erased():
    assert nf("unit a { 0 ; q!() }") == "0"


def test_nested_unit_flattened():
    got = normalize(parse("unit x { unit y { p?().0 ; q!() } | r?().0 ; s!() }"))
    want = normalize(parse("unit y { p?().0 ; q!() } | unit x { r?().0 ; s!() }"))
    assert got.canonical_key == want.canonical_key
    assert nf_violations(got.term) == []


def test_output_floats_out():
    assert nf("unit a { z!() | p?(u).0 ; q!() }") == "z!() | unit a { p?(u).0 ; q!() }"


def test_restriction_extruded_and_sorted():
    got = normalize(parse("new u in (p?().u!() | new v in v?().0)"))
    assert got.canonical_key == normalize(parse("new v, u in (p?().u!() | v?().0)")).canonical_key
    assert len(got.binders) == 2


def test_restriction_under_prefix_stays():
    got = normalize(parse("x?().new u in u!()"))
    assert isinstance(got.term, Sum)
    assert isinstance(got.term.branches[0].cont, Restrict)


def test_restriction_in_handler_stays():
    got = normalize(parse("unit x { a?().0 ; new u in u!() }"))
    assert isinstance(got.term, Workunit)
    assert isinstance(got.term.handler, Restrict)


def test_extrusion_past_unit_renames_on_clash():
    # z is free in the handler, so the body's z must be renamed on the way out
    got = normalize(parse("unit x { new z in z?().0 ; z!() }"))
    (b,) = got.binders
    assert b != Name("z")
    assert free_names(got.term) == {Name("x"), Name("z")}


def test_dead_restriction_collected():
    assert nf("new u in a!()") == "a!()"
    assert nf("new u in 0") == "0"


def test_congruent_examples():
    P, Q = parse("p?().0"), parse("q!(a)")
    assert congruent(Par((P, Q)), Par((Q, P)))
    assert congruent(parse("unit x { 0 ; q!() }"), NIL)
    assert not congruent(parse("x!()"), parse("y!()"))


def test_congruence_is_not_name_blind():
    assert not congruent(parse("new a in a!(b)"), parse("new a in b!(a)"))
    assert not congruent(parse("new a, b in a!(b)"), parse("new a in a!(a)"))


def test_is_committed():
    assert is_committed(parse("unit x { 0 ; a?().0 | b!() }"))
    assert is_committed(parse("unit x { 0 ; q!() } | unit y { 0 ; r!() }"))
    assert not is_committed(parse("unit x { a?(u).0 ; q!() }"))
    assert not is_committed(parse("unit x { a!() ; q!() }"))


def test_trace_names_axioms():
    got = normalize(parse("unit a { z!() | new u in (u?().0 | 0) ; q!() }"), trace=True)
    axioms = [s.axiom for s in got.trace]
    assert set(axioms) <= set(AXIOMS)
    assert "float" in axioms and "scope-unit" in axioms and "monoid-par" in axioms


def test_trace_commit_and_flatten():
    got = normalize(parse("unit x { unit y { 0 ; q!() } | r?().0 ; s!() }"), trace=True)
    axioms = [s.axiom for s in got.trace]
    assert "unit-commit" in axioms and axioms.count("unit-flatten") == 0
    got = normalize(parse("unit x { unit y { p?().0 ; q!() } | r?().0 ; s!() }"), trace=True)
    assert "unit-flatten" in [s.axiom for s in got.trace]


def test_fuel_exhaustion():
    p = parse("unit a { unit b { z!() | p?(u).0 ; q!() } ; q!() }")
    with pytest.raises(FuelExhausted):
        normalize(p, fuel=1)


def test_symmetric_restriction_group():
    # binders that play identical roles: any order gives one key
    k1 = normalize(parse("new a, b, c in (a!(b) | b!(c) | c!(a))")).canonical_key
    k2 = normalize(parse("new c, a, b in (b!(c) | a!(b) | c!(a))")).canonical_key
    k3 = normalize(parse("new a, b, c in (a!(c) | c!(b) | b!(a))")).canonical_key
    assert k1 == k2 == k3
    assert k1 != normalize(parse("new a, b, c in (a!(b) | b!(a) | c!(c))")).canonical_key


@given(terms())
def test_idempotent(p):
    once = normalize(p)
    assert normalize(once.term).term == once.term


@given(terms())
def test_free_names_preserved(p):
    got = normalize(p, trace=True)
    # erasing a committed unit drops its unit name and handler names
    if any(s.axiom == "unit-commit" for s in got.trace):
        assert free_names(got.term) <= free_names(p)
    else:
        assert free_names(got.term) == free_names(p)


def test_commit_drops_handler_names():
    assert free_names(normalize(parse("unit a { 0 ; q!() }")).term) == frozenset()


@given(terms())
def test_contract(p):
    assert nf_violations(normalize(p).term) == []


@given(terms(), st.randoms(use_true_random=False))
def test_alpha_and_permutation_invariance(p, rng):
    q = variant(alpha_variant(p, rng), rng, steps=4)
    assert normalize(p).canonical_key == normalize(q).canonical_key


@given(terms(), st.randoms(use_true_random=False), st.integers(0, 2))
def test_congruence_under_contexts(p, rng, ctx):
    q = variant(p, rng, steps=4)
    r = random_process(rng, 4)
    n = rng.choice([Name("a"), Name("x")])
    wrap = [
        lambda t: Restrict(n, t),
        lambda t: Par((r, t)),
        lambda t: Workunit(t, r, n),
    ][ctx]
    assert normalize(wrap(p)).canonical_key == normalize(wrap(q)).canonical_key
