"""One-step reduction over normal forms.

In a normal form every active component sits in the top region: outputs,
sums, replications and units whose bodies hold only sums and replications.
A top-level output may therefore meet an input either at top level or
inside any unit body, because the floating law lets the message re-enter
the unit.  Nothing under a prefix, inside a replication body or inside a
handler is active.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .congruence import NormalForm, normalize, split_region
from .syntax import ANON_UNIT
from .terms import (
    NIL, Name, Output, Process, Repl, Restrict, Sum, Workunit, all_names,
    fresh_reserved, par, restrict, substitute,
)

Rule = Literal["COM", "REP", "FAIL"]


class StaleRedex(ValueError):
    """The redex is not enabled in the given normal form."""


@dataclass(frozen=True)
class Redex:
    """One enabled reduction.

    Loci index the top-level components of the normal form; a two-element
    locus ``(i, j)`` is component ``j`` of the body of unit ``i``.
    """

    rule: Rule
    output_locus: tuple[int, ...]
    target_locus: tuple[int, ...]
    branch_index: int | None
    subject: Name

    def __str__(self):
        where = ".".join(map(str, self.target_locus))
        extra = f" branch {self.branch_index}" if self.branch_index is not None else ""
        return f"{self.rule} on {self.subject}: output {self.output_locus[0]} -> {where}{extra}"


@dataclass(frozen=True)
class Step:
    redex: Redex
    target: NormalForm
    consumed: frozenset[Name]
    produced: frozenset[Name]

    def observes(self, name: Name) -> bool:
        """True if this step consumed or emitted an output on free ``name``."""
        return name in self.consumed or name in self.produced


def _body_parts(w: Workunit) -> list[Process]:
    return split_region(w.body)[1]


def redexes(nf: NormalForm) -> list[Redex]:
    _, comps = split_region(nf.term)
    # (locus, component) for every input-capable component
    listeners = []
    for i, c in enumerate(comps):
        if isinstance(c, (Sum, Repl)):
            listeners.append(((i,), c))
        elif isinstance(c, Workunit):
            for j, x in enumerate(_body_parts(c)):
                listeners.append(((i, j), x))
    out = []
    for i, o in enumerate(comps):
        if not isinstance(o, Output):
            continue
        arity = len(o.args)
        for locus, c in listeners:
            if isinstance(c, Sum):
                for k, b in enumerate(c.branches):
                    if b.subject == o.subject and len(b.params) == arity:
                        out.append(Redex("COM", (i,), locus, k, o.subject))
            elif c.subject == o.subject and len(c.params) == arity:
                out.append(Redex("REP", (i,), locus, None, o.subject))
        if arity:
            continue
        for j, w in enumerate(comps):
            if (isinstance(w, Workunit) and w.unit == o.subject
                    and all(isinstance(x, Sum) for x in _body_parts(w))):
                out.append(Redex("FAIL", (i,), (j,), None, o.subject))
    return out


def _top_outputs(p: Process) -> frozenset[Name]:
    nf = normalize(p)
    binders, comps = split_region(nf.term)
    return frozenset(c.subject for c in comps
                     if isinstance(c, Output) and c.subject not in binders)


def fire(nf: NormalForm, r: Redex) -> Step:
    """Apply ``r``; also report the free output subjects it consumed and emitted."""
    if r not in redexes(nf):
        raise StaleRedex(f"redex {r} is not enabled")
    binders, comps = split_region(nf.term)
    o = comps[r.output_locus[0]]
    comps = list(comps)
    i = r.target_locus[0]
    if r.rule == "FAIL":
        w = comps[i]
        z = fresh_reserved(ANON_UNIT, all_names(nf.term))
        piece = Restrict(z, Workunit(w.handler, NIL, z))
        comps[i] = piece
    else:
        if len(r.target_locus) == 1:
            target = comps[i]
        else:
            body = _body_parts(comps[i])
            target = body[r.target_locus[1]]
        if r.rule == "COM":
            b = target.branches[r.branch_index]
            piece = substitute(b.cont, dict(zip(b.params, o.args)))
            replacement = piece
        else:
            piece = substitute(target.body, dict(zip(target.params, o.args)))
            replacement = par(target, piece)
        if len(r.target_locus) == 1:
            comps[i] = replacement
        else:
            w = comps[i]
            body[r.target_locus[1]] = replacement
            comps[i] = Workunit(par(*body), w.handler, w.unit)
    del comps[r.output_locus[0]]
    hidden = set(binders)
    produced = frozenset(n for n in _top_outputs(piece) if n not in hidden)
    consumed = frozenset() if o.subject in hidden else frozenset({o.subject})
    target_nf = normalize(restrict(binders, par(*comps)))
    return Step(r, target_nf, consumed, produced)


def apply(nf: NormalForm, r: Redex) -> NormalForm:
    return fire(nf, r).target


def steps(nf: NormalForm) -> list[Step]:
    return [fire(nf, r) for r in redexes(nf)]


def step_all(nf: NormalForm) -> list[NormalForm]:
    """Distinct successors in canonical-key order."""
    seen = {}
    for s in steps(nf):
        seen.setdefault(s.target.canonical_key, s.target)
    return [seen[k] for k in sorted(seen)]
