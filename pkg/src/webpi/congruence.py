"""Structural congruence as a directed rewrite to a canonical normal form.

Normalization runs in two passes over each *scope region* (the top level,
every prefix continuation, every replication body and every unit handler):

1. ``collect`` hoists unguarded restrictions to the front of the region
   (alpha-renaming where a side condition would otherwise fail), floats
   outputs out of unit bodies, flattens nested units, erases committed units
   and garbage-collects dead restrictions.
2. ``order`` sorts parallel components, sum branches and restriction groups
   by their canonical keys.

The canonical key replaces bound names by binder levels.  The binders of one
restriction group are ordered by iterated signature refinement, with the
remaining ties resolved by taking the least key over their permutations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import itertools

from .terms import (
    NIL, InputBranch, Name, Nil, Output, Par, Process, Repl, Restrict, Sum,
    Workunit, par, prime, restrict, substitute,
)

AXIOMS = {
    "scope-nil": "(u)0 = 0",
    "scope-swap": "(u)(v)P = (v)(u)P",
    "scope-par": "P | (u)Q = (u)(P | Q) if u not in fn(P)",
    "scope-unit": "<(z)P ; Q>_x = (z)<P ; Q>_x if z not in {x} + fn(Q)",
    "unit-commit": "<0 ; Q>_x = 0",
    "unit-flatten": "<<P ; Q>_y | R ; R'>_x = <P ; Q>_y | <R ; R'>_x",
    "float": "<z!(u) | P ; Q>_x = z!(u) | <P ; Q>_x",
    "monoid-par": "abelian monoid laws for |",
    "monoid-sum": "abelian monoid laws for +",
    "alpha": "renaming of a bound name",
    "restriction-gc": "(u)P = P if u not in fn(P)  [derived]",
}

# permutations tried per restriction group before giving up on exact ties
PERMUTATION_LIMIT = 5040


class FuelExhausted(RuntimeError):
    """The rewrite budget ran out; the directed system terminates, so this is a bug."""


@dataclass(frozen=True)
class TraceStep:
    axiom: str
    detail: str

    def __str__(self):
        return f"{self.axiom}: {self.detail}"


@dataclass(frozen=True)
class NormalForm:
    term: Process
    canonical_key: str
    trace: tuple[TraceStep, ...] = field(default=(), compare=False, repr=False)

    def __hash__(self):
        return hash(self.canonical_key)

    def __eq__(self, other):
        return (isinstance(other, NormalForm)
                and self.canonical_key == other.canonical_key)

    @property
    def binders(self) -> list[Name]:
        return split_region(self.term)[0]

    @property
    def components(self) -> list[Process]:
        return split_region(self.term)[1]

    def __str__(self):
        from .syntax import pretty
        return pretty(self.term)


def split_region(term: Process) -> tuple[list[Name], list[Process]]:
    """Leading restriction group and the parallel components under it."""
    binders = []
    while isinstance(term, Restrict):
        binders.append(term.bound)
        term = term.body
    if isinstance(term, Nil):
        return binders, []
    if isinstance(term, Par):
        return binders, list(term.components)
    return binders, [term]


# -- canonical keys -----------------------------------------------------------

def _label(n: Name, env) -> str:
    v = env.get(n)
    if v is not None:
        return v
    return n.text if n.uid is None else f"{n.text}/{n.uid}"


def canonical_key(p: Process, env=None, depth: int = 0) -> str:
    """Serialization invariant under alpha-renaming and permutation of ``|``/``+``."""
    env = env or {}
    envt = tuple(sorted((n.sort_key(), env[n]) for n in p.fn if n in env))
    return _key_cached(p, envt, depth)


def _env_of(p, envt):
    lookup = dict(envt)
    return {n: lookup[n.sort_key()] for n in p.fn if n.sort_key() in lookup}


@lru_cache(maxsize=1 << 18)
def _key_cached(p, envt, depth) -> str:
    return _key(p, _env_of(p, envt), depth)


def _bind_levels(env, binders, depth):
    env = dict(env)
    for i, b in enumerate(binders):
        env[b] = f"#{depth + i}"
    return env


def _branch_key(b: InputBranch, env, depth) -> str:
    n = len(b.params)
    env2 = _bind_levels(env, b.params, depth)
    return f"i({_label(b.subject, env)}:{n})." + canonical_key(b.cont, env2, depth + n)


def _key(p, env, depth) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Output):
        return f"o({_label(p.subject, env)}:{','.join(_label(a, env) for a in p.args)})"
    if isinstance(p, Sum):
        return "s[" + ";".join(sorted(_branch_key(b, env, depth) for b in p.branches)) + "]"
    if isinstance(p, Repl):
        n = len(p.params)
        env2 = _bind_levels(env, p.params, depth)
        return (f"r({_label(p.subject, env)}:{n})."
                + canonical_key(p.body, env2, depth + n))
    if isinstance(p, Par):
        return "p[" + ";".join(sorted(canonical_key(c, env, depth)
                                      for c in p.components)) + "]"
    if isinstance(p, Workunit):
        return (f"w({canonical_key(p.body, env, depth)};"
                f"{canonical_key(p.handler, env, depth)};{_label(p.unit, env)})")
    if isinstance(p, Restrict):
        binders, body = [], p
        while isinstance(body, Restrict):
            binders.append(body.bound)
            body = body.body
        _, body_key = group_order(tuple(binders), body, env, depth)
        return f"n{len(binders)}({body_key})"
    raise TypeError(f"not a process: {p!r}")


def group_order(binders: tuple[Name, ...], body: Process, env, depth):
    """Canonical order of a restriction group and the body key it induces."""
    envt = tuple(sorted((n.sort_key(), env[n]) for n in body.fn
                        if n in env and n not in binders))
    return _group_order_cached(binders, body, envt, depth)


@lru_cache(maxsize=1 << 16)
def _group_order_cached(binders, body, envt, depth):
    env = _env_of(body, envt)
    env = {n: v for n, v in env.items() if n not in binders}
    k = len(binders)
    inner = depth + k
    if len(set(binders)) != k:
        # shadowed duplicates: only the innermost occurrence is visible
        return _shadowed_group(binders, body, env, depth)
    cls = {b: 0 for b in binders}
    ncls = 1
    while k > 1 and ncls < k:
        sig = {}
        for b in binders:
            env2 = dict(env)
            for c in binders:
                env2[c] = f"~{cls[c]}"
            env2[b] = "*"
            sig[b] = (cls[b], canonical_key(body, env2, inner))
        distinct = sorted(set(sig.values()))
        if len(distinct) == ncls:
            break
        rank = {s: i for i, s in enumerate(distinct)}
        cls = {b: rank[sig[b]] for b in binders}
        ncls = len(distinct)
    groups = [[b for b in binders if cls[b] == c] for c in range(ncls)]
    budget = 1
    for g in groups:
        for i in range(2, len(g) + 1):
            budget *= i
    if budget > PERMUTATION_LIMIT:
        choices = [tuple(groups)]
    else:
        choices = itertools.product(*(itertools.permutations(g) for g in groups))
    best = None
    for cand in choices:
        order = tuple(b for g in cand for b in g)
        key = canonical_key(body, _bind_levels(env, order, depth), inner)
        if best is None or key < best[1]:
            best = (order, key)
    return best


def _shadowed_group(binders, body, env, depth):
    # (u)(u)P: the outer u is dead; keep positions, key as nested singletons
    env2 = _bind_levels(env, binders, depth)
    return tuple(binders), canonical_key(body, env2, depth + len(binders))


# -- normalization ------------------------------------------------------------

class _Normalizer:
    def __init__(self, fuel: int, record: bool):
        self.fuel = fuel
        self.steps = 0
        self.record = record
        self.trace: list[TraceStep] = []

    def tick(self, axiom, detail=None):
        self.steps += 1
        if self.steps > self.fuel:
            raise FuelExhausted(f"normalization exceeded {self.fuel} rewrite steps")
        if self.record:
            from .syntax import pretty
            if detail is None:
                text = ""
            elif isinstance(detail, str):
                text = detail
            else:
                text = pretty(detail)
            self.trace.append(TraceStep(axiom, text))

    # pass 1 ---------------------------------------------------------------

    def region(self, p: Process) -> Process:
        taken = set(p.fn)
        binders, comps = self.collect(p, taken)
        used = frozenset().union(*(c.fn for c in comps)) if comps else frozenset()
        kept = []
        for b in binders:
            if b in used:
                kept.append(b)
            else:
                self.tick("restriction-gc" if comps else "scope-nil", f"({b})")
        return restrict(kept, par(*comps))

    def collect(self, p, taken: set) -> tuple[list[Name], list[Process]]:
        if isinstance(p, Nil):
            return [], []
        if isinstance(p, Output):
            return [], [p]
        if isinstance(p, Sum):
            return [], [Sum(tuple(InputBranch(b.subject, b.params, self.region(b.cont))
                                  for b in p.branches))]
        if isinstance(p, Repl):
            return [], [Repl(p.subject, p.params, self.region(p.body))]
        if isinstance(p, Par):
            binders, comps = [], []
            for c in p.components:
                bs, cs = self.collect(c, taken)
                for b in bs:
                    self.tick("scope-par", f"({b})")
                if len(cs) != 1:
                    self.tick("monoid-par", c)
                binders += bs
                comps += cs
            return binders, comps
        if isinstance(p, Restrict):
            b, body = p.bound, p.body
            if b in taken:
                nb = prime(b, taken | body.fn)
                self.tick("alpha", f"{b} -> {nb}")
                body = substitute(body, {b: nb})
                b = nb
            taken.add(b)
            bs, cs = self.collect(body, taken)
            return [b] + bs, cs
        if isinstance(p, Workunit):
            bs, cs = self.collect(p.body, taken)
            for b in bs:
                self.tick("scope-unit", f"({b}) out of unit {p.unit}")
            out, body = [], []
            for c in cs:
                if isinstance(c, Output):
                    self.tick("float", c)
                    out.append(c)
                elif isinstance(c, Workunit):
                    self.tick("unit-flatten", f"unit {c.unit} out of unit {p.unit}")
                    out.append(c)
                else:
                    body.append(c)
            if not body:
                self.tick("unit-commit", f"unit {p.unit}")
                return bs, out
            return bs, out + [Workunit(par(*body), self.region(p.handler), p.unit)]
        raise TypeError(f"not a process: {p!r}")

    # pass 2 ---------------------------------------------------------------

    def order(self, term: Process, env, depth) -> Process:
        binders, comps = split_region(term)
        if binders:
            order, _ = group_order(tuple(binders), par(*comps), env, depth)
            if list(order) != binders:
                self.tick("scope-swap", ", ".join(map(str, order)))
            env = _bind_levels(env, order, depth)
            depth += len(order)
        else:
            order = ()
        comps = [self.order_comp(c, env, depth) for c in comps]
        return restrict(order, par(*self.sort(comps, env, depth, "monoid-par")))

    def sort(self, items, env, depth, axiom, keyfn=None):
        keyfn = keyfn or (lambda c: canonical_key(c, env, depth))
        ranked = sorted(items, key=keyfn)
        if ranked != list(items):
            self.tick(axiom, "reorder")
        return ranked

    def order_comp(self, c, env, depth):
        if isinstance(c, Sum):
            branches = []
            for b in c.branches:
                n = len(b.params)
                cont = self.order(b.cont, _bind_levels(env, b.params, depth), depth + n)
                branches.append(InputBranch(b.subject, b.params, cont))
            branches = self.sort(branches, env, depth, "monoid-sum",
                                 lambda b: _branch_key(b, env, depth))
            return Sum(tuple(branches))
        if isinstance(c, Repl):
            n = len(c.params)
            body = self.order(c.body, _bind_levels(env, c.params, depth), depth + n)
            return Repl(c.subject, c.params, body)
        if isinstance(c, Workunit):
            _, comps = split_region(c.body)
            comps = [self.order_comp(x, env, depth) for x in comps]
            body = par(*self.sort(comps, env, depth, "monoid-par"))
            return Workunit(body, self.order(c.handler, env, depth), c.unit)
        return c


def default_fuel(p: Process) -> int:
    return 10 * p.size ** 2


def normalize(p: Process, *, fuel: int | None = None, trace: bool = False) -> NormalForm:
    """Canonical representative of the congruence class of ``p``."""
    n = _Normalizer(default_fuel(p) if fuel is None else fuel, trace)
    term = n.order(n.region(p), {}, 0)
    return NormalForm(term, canonical_key(term), tuple(n.trace))


def congruent(p: Process, q: Process) -> bool:
    return normalize(p).canonical_key == normalize(q).canonical_key


def is_committed(p: Process) -> bool:
    return isinstance(normalize(p).term, Nil)


def nf_violations(term: Process) -> list[str]:
    """Structural scan for the normal-form contract; empty means compliant."""
    out: list[str] = []
    _scan_region(term, out)
    return out


def _scan_region(term, out):
    binders, comps = split_region(term)
    used = frozenset().union(*(c.fn for c in comps)) if comps else frozenset()
    for b in binders:
        if b not in used:
            out.append(f"dead restriction ({b})")
    if len(set(binders)) != len(binders):
        out.append("duplicate binder in restriction group")
    for c in comps:
        if isinstance(c, (Nil, Par, Restrict)):
            out.append(f"unflattened {type(c).__name__} component")
        _scan_comp(c, out)


def _scan_comp(c, out):
    if isinstance(c, Sum):
        for b in c.branches:
            _scan_region(b.cont, out)
    elif isinstance(c, Repl):
        _scan_region(c.body, out)
    elif isinstance(c, Workunit):
        if isinstance(c.body, Nil):
            out.append(f"committed unit {c.unit} not erased")
        body = c.body.components if isinstance(c.body, Par) else (c.body,)
        for x in body:
            if isinstance(x, Workunit):
                out.append(f"unit nested in unit {c.unit}")
            elif isinstance(x, Output):
                out.append(f"output at top of unit {c.unit}")
            elif not isinstance(x, (Sum, Repl, Nil)):
                out.append(f"{type(x).__name__} at top of unit {c.unit}")
            _scan_comp(x, out)
        _scan_region(c.handler, out)
