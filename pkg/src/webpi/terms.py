"""Process terms, names, binding structure and substitution.

All nodes are frozen dataclasses; a process value never changes after
construction.  ``Par`` and ``Sum`` keep their components in source order;
commutativity only enters through normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import re
from typing import Iterable, Mapping, Union

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


@dataclass(frozen=True)
class Name:
    """A channel / unit / value name.

    ``uid`` is ``None`` for names written by the user.  Machine-generated
    names carry an integer ``uid`` and live in a reserved namespace that the
    parser never produces.
    """

    text: str
    uid: int | None = None

    def __post_init__(self):
        if not self.text or not NAME_RE.match(self.text):
            raise ValueError(f"invalid name text {self.text!r}")

    @property
    def reserved(self) -> bool:
        return self.uid is not None

    def sort_key(self):
        return (self.text, -1 if self.uid is None else self.uid)

    def __str__(self):
        if self.uid is None:
            return self.text
        return f"_{self.text}{self.uid}"

    def __repr__(self):
        return f"Name({str(self)!r})"


def names(*texts: str) -> tuple[Name, ...]:
    return tuple(Name(t) for t in texts)


class _Node:
    """Mixin giving every process node cached structural facts."""

    @cached_property
    def fn(self) -> frozenset[Name]:
        return _free_names(self)

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in _children(self))

    @cached_property
    def _hash(self) -> int:
        return hash((type(self).__name__,) + tuple(
            getattr(self, f) for f in self.__dataclass_fields__))

    def __hash__(self):
        return self._hash

    def __str__(self):
        from .syntax import pretty
        return pretty(self)


@dataclass(frozen=True, eq=True)
class Nil(_Node):
    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Output(_Node):
    subject: Name
    args: tuple[Name, ...] = ()
    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class InputBranch(_Node):
    subject: Name
    params: tuple[Name, ...]
    cont: "Process"
    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Sum(_Node):
    branches: tuple[InputBranch, ...]
    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Restrict(_Node):
    bound: Name
    body: "Process"
    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Par(_Node):
    components: tuple["Process", ...]
    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Repl(_Node):
    subject: Name
    params: tuple[Name, ...]
    body: "Process"
    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Workunit(_Node):
    body: "Process"
    handler: "Process"
    unit: Name
    __hash__ = _Node.__hash__


Process = Union[Nil, Output, Sum, Restrict, Par, Repl, Workunit]

NIL = Nil()


# -- small constructors -------------------------------------------------------

def inp(subject: Name, params: Iterable[Name], cont: Process) -> Sum:
    """A single-branch input ``subject(params).cont``."""
    return Sum((InputBranch(subject, tuple(params), cont),))


def par(*procs: Process) -> Process:
    """Parallel composition that collapses trivial cases."""
    if not procs:
        return NIL
    if len(procs) == 1:
        return procs[0]
    return Par(tuple(procs))


def restrict(binders: Iterable[Name], body: Process) -> Process:
    for b in reversed(list(binders)):
        body = Restrict(b, body)
    return body


def _children(p) -> tuple:
    if isinstance(p, (Nil, Output)):
        return ()
    if isinstance(p, InputBranch):
        return (p.cont,)
    if isinstance(p, Sum):
        return p.branches
    if isinstance(p, Restrict):
        return (p.body,)
    if isinstance(p, Par):
        return p.components
    if isinstance(p, Repl):
        return (p.body,)
    if isinstance(p, Workunit):
        return (p.body, p.handler)
    raise TypeError(f"not a process: {p!r}")


# -- free names ---------------------------------------------------------------

def _free_names(p) -> frozenset[Name]:
    if isinstance(p, Nil):
        return frozenset()
    if isinstance(p, Output):
        return frozenset((p.subject,) + p.args)
    if isinstance(p, InputBranch):
        return frozenset({p.subject}) | (p.cont.fn - set(p.params))
    if isinstance(p, Sum):
        return frozenset().union(*(b.fn for b in p.branches))
    if isinstance(p, Restrict):
        return p.body.fn - {p.bound}
    if isinstance(p, Par):
        return frozenset().union(*(c.fn for c in p.components))
    if isinstance(p, Repl):
        return frozenset({p.subject}) | (p.body.fn - set(p.params))
    if isinstance(p, Workunit):
        # the unit name is a free occurrence, not a binder
        return p.body.fn | p.handler.fn | {p.unit}
    raise TypeError(f"not a process: {p!r}")


def free_names(p: Process) -> frozenset[Name]:
    return p.fn


def all_names(p) -> set[Name]:
    """Every name occurring in ``p``, free or bound."""
    out: set[Name] = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Output):
            out.add(q.subject)
            out.update(q.args)
        elif isinstance(q, InputBranch):
            out.add(q.subject)
            out.update(q.params)
        elif isinstance(q, Restrict):
            out.add(q.bound)
        elif isinstance(q, Repl):
            out.add(q.subject)
            out.update(q.params)
        elif isinstance(q, Workunit):
            out.add(q.unit)
        stack.extend(_children(q))
    return out


def prime(name: Name, avoid) -> Name:
    """First primed variant of ``name`` not in ``avoid``."""
    n = name
    while n in avoid:
        n = Name(n.text + "'", n.uid)
    return n


def fresh_reserved(base: str, avoid) -> Name:
    """Counter-based machine name outside the user namespace."""
    k = 0
    while Name(base, k) in avoid:
        k += 1
    return Name(base, k)


# -- substitution -------------------------------------------------------------

def substitute(p: Process, mapping: Mapping[Name, Name]) -> Process:
    """Simultaneous capture-avoiding substitution of names.

    Bound names are renamed (primed) only when they would capture a value of
    the mapping.
    """
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return p
    return _subst(p, mapping)


def _subst(p, m: dict[Name, Name]):
    live = {k: v for k, v in m.items() if k in p.fn}
    if not live:
        return p
    m = live
    if isinstance(p, Output):
        return Output(m.get(p.subject, p.subject),
                      tuple(m.get(a, a) for a in p.args))
    if isinstance(p, Sum):
        return Sum(tuple(_subst_branch(b, m) for b in p.branches))
    if isinstance(p, Par):
        return Par(tuple(_subst(c, m) for c in p.components))
    if isinstance(p, Workunit):
        return Workunit(_subst(p.body, m), _subst(p.handler, m),
                        m.get(p.unit, p.unit))
    if isinstance(p, Restrict):
        (b,), body = _subst_binders((p.bound,), p.body, m)
        return Restrict(b, body)
    if isinstance(p, Repl):
        params, body = _subst_binders(p.params, p.body, m)
        return Repl(m.get(p.subject, p.subject), params, body)
    raise TypeError(f"not a process: {p!r}")


def _subst_branch(b: InputBranch, m):
    params, cont = _subst_binders(b.params, b.cont, m)
    return InputBranch(m.get(b.subject, b.subject), params, cont)


def _subst_binders(binders, body, m):
    inner = {k: v for k, v in m.items() if k not in binders}
    inner = {k: v for k, v in inner.items() if k in body.fn}
    if not inner:
        return tuple(binders), body
    values = set(inner.values())
    avoid = set(body.fn) | values | set(binders)
    renamed = []
    for b in binders:
        if b in values:
            nb = prime(b, avoid)
            avoid.add(nb)
            inner[b] = nb
            renamed.append(nb)
        else:
            renamed.append(b)
    return tuple(renamed), _subst(body, inner)


# -- alpha equivalence --------------------------------------------------------

def alpha_key(p: Process) -> str:
    """Order-preserving serialization with bound names replaced by levels."""
    out: list[str] = []
    _akey(p, {}, 0, out)
    return "".join(out)


def _akey(p, env, depth, out):
    def nm(n):
        return env[n] if n in env else f"{n.text}/{n.uid}"

    if isinstance(p, Nil):
        out.append("0")
    elif isinstance(p, Output):
        out.append(f"o({nm(p.subject)}:{','.join(nm(a) for a in p.args)})")
    elif isinstance(p, Sum):
        out.append("s[")
        for b in p.branches:
            env2 = dict(env)
            for i, u in enumerate(b.params):
                env2[u] = f"#{depth + i}"
            out.append(f"i({nm(b.subject)}:{len(b.params)})")
            _akey(b.cont, env2, depth + len(b.params), out)
            out.append(";")
        out.append("]")
    elif isinstance(p, Restrict):
        env2 = dict(env)
        env2[p.bound] = f"#{depth}"
        out.append("n(")
        _akey(p.body, env2, depth + 1, out)
        out.append(")")
    elif isinstance(p, Par):
        out.append("p[")
        for c in p.components:
            _akey(c, env, depth, out)
            out.append(";")
        out.append("]")
    elif isinstance(p, Repl):
        env2 = dict(env)
        for i, u in enumerate(p.params):
            env2[u] = f"#{depth + i}"
        out.append(f"r({nm(p.subject)}:{len(p.params)})")
        _akey(p.body, env2, depth + len(p.params), out)
    elif isinstance(p, Workunit):
        out.append("w(")
        _akey(p.body, env, depth, out)
        out.append(";")
        _akey(p.handler, env, depth, out)
        out.append(f";{nm(p.unit)})")
    else:
        raise TypeError(f"not a process: {p!r}")


def alpha_eq(p: Process, q: Process) -> bool:
    return alpha_key(p) == alpha_key(q)


# -- well-formedness ----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self):
        return self.message


def well_formed(p: Process) -> list[Violation]:
    """Grammar-side constraints; an empty list means the term is fine."""
    out: list[Violation] = []
    _wf(p, out)
    return out


def _wf(p, out):
    if isinstance(p, Sum):
        if not p.branches:
            out.append(Violation("empty-sum", "empty alternative composition"))
        for b in p.branches:
            _check_params(b.subject, b.params, out)
    elif isinstance(p, Repl):
        _check_params(p.subject, p.params, out)
    elif isinstance(p, Par) and len(p.components) < 2:
        out.append(Violation(
            "short-par", "parallel composition with fewer than two components"))
    for c in _children(p):
        _wf(c, out)


def _check_params(subject, params, out):
    seen = set()
    for u in params:
        if u in seen:
            out.append(Violation(
                "duplicate-param",
                f"duplicate parameter {u} in prefix {subject}(...)"))
        seen.add(u)


def arity_warnings(p: Process) -> list[str]:
    """Subjects used with more than one arity.

    Bound names are tracked per binder, so two unrelated binders that happen
    to share a spelling are not conflated.
    """
    uses: dict[tuple, set[int]] = {}
    label: dict[tuple, str] = {}

    def note(n, env, arity):
        ident = env.get(n, ("free", n))
        uses.setdefault(ident, set()).add(arity)
        label[ident] = str(n)

    counter = [0]

    def bind(env, binders):
        env = dict(env)
        for b in binders:
            counter[0] += 1
            env[b] = ("bound", counter[0])
        return env

    def walk(q, env):
        if isinstance(q, Output):
            note(q.subject, env, len(q.args))
        elif isinstance(q, Sum):
            for b in q.branches:
                note(b.subject, env, len(b.params))
                walk(b.cont, bind(env, b.params))
        elif isinstance(q, Repl):
            note(q.subject, env, len(q.params))
            walk(q.body, bind(env, q.params))
        elif isinstance(q, Restrict):
            walk(q.body, bind(env, (q.bound,)))
        elif isinstance(q, Par):
            for c in q.components:
                walk(c, env)
        elif isinstance(q, Workunit):
            walk(q.body, env)
            walk(q.handler, env)

    walk(p, {})
    return [f"name {label[k]} used with arities {sorted(v)}"
            for k, v in sorted(uses.items(), key=lambda kv: label[kv[0]])
            if len(v) > 1]
