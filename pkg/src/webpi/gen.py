"""Random well-formed terms and random congruent variants.

``variant`` applies structural-congruence axioms in either direction at
random positions, independently of the normalizer it is used to test.
"""

from __future__ import annotations

import random

from .terms import (
    NIL, InputBranch, Name, Nil, Output, Par, Process, Repl, Restrict, Sum,
    Workunit, all_names, prime,
)

POOL = tuple(Name(t) for t in ("a", "b", "c", "x", "y"))
# preferred arity per subject, so that outputs and inputs tend to match
ARITY = {"a": 0, "b": 1, "c": 0, "x": 0, "y": 2}


def random_process(rng: random.Random, size: int = 12, pool=POOL,
                   max_arity: int = 2) -> Process:
    """A random well-formed raw term with at most ``size`` constructors."""
    return _Gen(rng, pool, max_arity).proc(max(1, size))


class _Gen:
    def __init__(self, rng, pool, max_arity):
        self.rng = rng
        self.pool = list(pool)
        self.max_arity = max_arity
        self.subjects = []

    def name(self, scope):
        return self.rng.choice(self.pool + list(scope))

    def subject(self, scope):
        # reuse an earlier subject half the time so messages meet listeners
        live = [n for n in self.subjects if n in self.pool or n in scope]
        n = self.rng.choice(live) if live and self.rng.random() < 0.5 else self.name(scope)
        self.subjects.append(n)
        return n

    def arity(self, subject):
        k = ARITY.get(subject.text)
        if k is None or k > self.max_arity or self.rng.random() < 0.1:
            k = self.rng.randint(0, self.max_arity)
        return k

    def params(self, subject):
        return tuple(self.rng.sample(self.pool, self.arity(subject)))

    def proc(self, budget, scope=()):
        rng = self.rng
        if budget <= 1:
            if rng.random() < 0.25:
                return NIL
            subject = self.subject(scope)
            return Output(subject, tuple(self.name(scope) for _ in range(self.arity(subject))))
        kind = rng.choice(["out", "sum", "sum", "new", "par", "par", "par", "par", "par",
                           "repl", "unit", "unit"])
        rest = budget - 1
        if kind == "nil":
            return NIL
        if kind == "out":
            return self.proc(1, scope)
        if kind == "sum":
            n = rng.randint(1, min(2, rest))
            shares = self.split(rest, n)
            return Sum(tuple(self.branch(s, scope) for s in shares))
        if kind == "repl":
            b = self.branch(rest, scope)
            return Repl(b.subject, b.params, b.cont)
        if kind == "new":
            u = rng.choice(self.pool)
            return Restrict(u, self.proc(rest, scope))
        if kind == "par":
            if rest < 2:
                return self.proc(1, scope)
            n = rng.randint(2, min(3, rest))
            shares = self.split(rest, n)
            if rng.random() < 0.5:
                # a bare message next to a larger component makes redexes likely
                shares[0] = 1
            return Par(tuple(self.proc(s, scope) for s in shares))
        if kind == "unit":
            if rest < 2:
                return self.proc(1, scope)
            b, h = self.split(rest, 2)
            return Workunit(self.proc(b, scope), self.proc(h, scope), self.name(scope))
        raise AssertionError(kind)

    def branch(self, budget, scope):
        subject = self.subject(scope)
        params = self.params(subject)
        return InputBranch(subject, params,
                           self.proc(max(1, budget), tuple(scope) + params))

    def split(self, total, n):
        cuts = sorted(self.rng.sample(range(1, total), n - 1)) if total > n else list(range(1, n))
        bounds = [0] + cuts + [total]
        return [max(1, bounds[i + 1] - bounds[i]) for i in range(n)]


# -- positions ----------------------------------------------------------------

def positions(p, path=()):
    """Every process-valued position as a path of child indices."""
    yield path
    for i, c in enumerate(_kids(p)):
        yield from positions(c, path + (i,))


def _kids(p):
    if isinstance(p, Sum):
        return tuple(b.cont for b in p.branches)
    if isinstance(p, Restrict):
        return (p.body,)
    if isinstance(p, Par):
        return p.components
    if isinstance(p, Repl):
        return (p.body,)
    if isinstance(p, Workunit):
        return (p.body, p.handler)
    return ()


def get_at(p, path):
    for i in path:
        p = _kids(p)[i]
    return p


def replace_at(p, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    kids = list(_kids(p))
    kids[i] = replace_at(kids[i], rest, new)
    if isinstance(p, Sum):
        return Sum(tuple(InputBranch(b.subject, b.params, k)
                         for b, k in zip(p.branches, kids)))
    if isinstance(p, Restrict):
        return Restrict(p.bound, kids[0])
    if isinstance(p, Par):
        return Par(tuple(kids))
    if isinstance(p, Repl):
        return Repl(p.subject, p.params, kids[0])
    if isinstance(p, Workunit):
        return Workunit(kids[0], kids[1], p.unit)
    raise AssertionError(p)


# -- congruence moves ---------------------------------------------------------

def _fresh(base: Name, *terms) -> Name:
    avoid = set()
    for t in terms:
        avoid |= all_names(t)
    return prime(base, avoid)


def _rename_bound(p: Restrict, avoid_terms=()) -> Restrict:
    from .terms import substitute
    nb = _fresh(p.bound, p, *avoid_terms)
    return Restrict(nb, substitute(p.body, {p.bound: nb}))


def moves(s: Process, rng: random.Random) -> list[tuple[str, Process]]:
    """All axiom instances (either direction) rewriting ``s`` in place."""
    out: list[tuple[str, Process]] = [
        ("par-unit-intro", Par((s, NIL))),
    ]
    if isinstance(s, Nil):
        out.append(("scope-nil-intro", Restrict(rng.choice(POOL), NIL)))
        out.append(("unit-commit-intro",
                    Workunit(NIL, Output(rng.choice(POOL)), rng.choice(POOL))))
    if isinstance(s, Par):
        cs = list(s.components)
        perm = cs[:]
        rng.shuffle(perm)
        out.append(("par-comm", Par(tuple(perm))))
        if len(cs) >= 3:
            out.append(("par-assoc", Par((cs[0], Par(tuple(cs[1:]))))))
        for i, c in enumerate(cs):
            if isinstance(c, Nil):
                rest = cs[:i] + cs[i + 1:]
                out.append(("par-unit-elim", rest[0] if len(rest) == 1 else Par(tuple(rest))))
            if isinstance(c, Par):
                out.append(("par-assoc-flat", Par(tuple(cs[:i] + list(c.components) + cs[i + 1:]))))
            if isinstance(c, Restrict):
                others = cs[:i] + cs[i + 1:]
                r = c
                if any(c.bound in o.fn for o in others):
                    r = _rename_bound(c, others)
                out.append(("scope-par-out",
                            Restrict(r.bound, Par(tuple(cs[:i] + [r.body] + cs[i + 1:])))))
            if isinstance(c, Workunit) and len(cs) == 2:
                other = cs[1 - i]
                if isinstance(other, (Workunit, Output)):
                    # <P;Q>_y | <R;R'>_x  ->  <<P;Q>_y | R ; R'>_x, and floating inward
                    out.append(("unit-unflatten" if isinstance(other, Workunit) else "float-in",
                                Workunit(Par((other, c.body)), c.handler, c.unit)))
    if isinstance(s, Sum) and len(s.branches) > 1:
        bs = list(s.branches)
        rng.shuffle(bs)
        out.append(("sum-comm", Sum(tuple(bs))))
    if isinstance(s, Restrict):
        out.append(("alpha", _rename_bound(s)))
        if isinstance(s.body, Nil):
            out.append(("scope-nil", NIL))
        if isinstance(s.body, Restrict):
            out.append(("scope-swap", Restrict(s.body.bound, Restrict(s.bound, s.body.body))))
        if isinstance(s.body, Par):
            cs = list(s.body.components)
            for i, c in enumerate(cs):
                if s.bound not in c.fn:
                    rest = cs[:i] + cs[i + 1:]
                    inner = rest[0] if len(rest) == 1 else Par(tuple(rest))
                    out.append(("scope-par-in", Par((c, Restrict(s.bound, inner)))))
        if isinstance(s.body, Workunit):
            w = s.body
            if s.bound != w.unit and s.bound not in w.handler.fn:
                out.append(("scope-unit-in",
                            Workunit(Restrict(s.bound, w.body), w.handler, w.unit)))
    if isinstance(s, Workunit):
        b = s.body
        if isinstance(b, Nil):
            out.append(("unit-commit", NIL))
        if isinstance(b, Restrict):
            r = b
            if r.bound == s.unit or r.bound in s.handler.fn:
                r = _rename_bound(b, (s.handler, Output(s.unit)))
            out.append(("scope-unit-out", Restrict(r.bound, Workunit(r.body, s.handler, s.unit))))
        parts = list(b.components) if isinstance(b, Par) else [b]
        for i, c in enumerate(parts):
            if isinstance(c, (Workunit, Output)):
                rest = parts[:i] + parts[i + 1:]
                body = NIL if not rest else rest[0] if len(rest) == 1 else Par(tuple(rest))
                out.append(("unit-flatten" if isinstance(c, Workunit) else "float-out",
                            Par((c, Workunit(body, s.handler, s.unit)))))
    if isinstance(s, (Sum, Repl)):
        out.append(("alpha-params", _rename_params(s, rng)))
    return out


def _rename_params(s, rng):
    from .terms import substitute

    def fix(params, body, whole):
        if not params:
            return params, body
        i = rng.randrange(len(params))
        old = params[i]
        new = _fresh(old, whole)
        ps = list(params)
        ps[i] = new
        return tuple(ps), substitute(body, {old: new})

    if isinstance(s, Repl):
        ps, body = fix(s.params, s.body, s)
        return Repl(s.subject, ps, body)
    branches = []
    for b in s.branches:
        ps, cont = fix(b.params, b.cont, s)
        branches.append(InputBranch(b.subject, ps, cont))
    return Sum(tuple(branches))


def variant(p: Process, rng: random.Random, steps: int = 3) -> Process:
    """Apply ``steps`` random congruence moves at random positions."""
    for _ in range(steps):
        paths = list(positions(p))
        rng.shuffle(paths)
        for path in paths:
            options = moves(get_at(p, path), rng)
            if options:
                _, new = rng.choice(options)
                p = replace_at(p, path, new)
                break
    return p


def alpha_variant(p: Process, rng: random.Random, rate: float = 0.7) -> Process:
    """Rename a random selection of binders; the result is alpha-equivalent."""
    for path in list(positions(p)):
        s = get_at(p, path)
        if isinstance(s, Restrict) and rng.random() < rate:
            p = replace_at(p, path, _rename_bound(s))
        elif isinstance(s, (Sum, Repl)) and rng.random() < rate:
            p = replace_at(p, path, _rename_params(s, rng))
    return p
