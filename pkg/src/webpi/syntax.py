"""ASCII concrete syntax: a hand-written recursive-descent parser and printer.

Grammar (``.wpi`` files)::

    process  := par
    par      := sumterm ('|' sumterm)*
    sumterm  := input ('+' input)* | atom
    atom     := '0' | output | repl | restrict | workunit | '(' process ')'
    output   := name '!' '(' names? ')'
    input    := name '?' '(' names? ')' '.' prefix
    prefix   := '0' | output | input | repl | restrict | workunit | '(' process ')'
    repl     := '*' input
    restrict := 'new' name (',' name)* 'in' process
    workunit := 'unit' name? '{' process ';' process '}'

``new ... in`` extends as far right as possible.  A unit without a name is
the anonymous form: its unit name is a fresh restricted machine name.
"""

from __future__ import annotations

from dataclasses import dataclass
import re

from .terms import (
    NIL, InputBranch, Name, Nil, Output, Par, Process, Repl, Restrict, Sum,
    Workunit, all_names,
)

KEYWORDS = frozenset({"new", "in", "unit"})
ANON_UNIT = "z"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected=()):
        self.message = message
        self.span = span
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{span}: {message}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'name', 'zero', 'kw', 'sym', 'eof'
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<zero>0(?![A-Za-z0-9_']))
  | (?P<sym>[!?().+|*{};,])
""", re.VERBOSE)


def _spans(text: str):
    line_starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            line_starts.append(i + 1)

    def at(offset, length):
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return SourceSpan(lo + 1, offset - line_starts[lo] + 1, max(1, length))
    return at


def tokenize(text: str) -> list[Token]:
    at = _spans(text)
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", at(pos, 1))
        kind = m.lastgroup
        tok = m.group()
        if kind == "name":
            if tok in KEYWORDS:
                kind = "kw"
            elif tok.startswith("_"):
                raise ParseError(
                    f"name {tok!r} uses the reserved '_' prefix", at(pos, len(tok)))
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok, at(pos, len(tok))))
        pos = m.end()
    # end-of-input is pinned to the last character so spans stay in the text
    eof = at(max(len(text) - 1, 0), 1)
    tokens.append(Token("eof", "", eof))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.anon = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.span, expected)

    def is_sym(self, s) -> bool:
        return self.tok.kind == "sym" and self.tok.text == s

    def is_kw(self, s) -> bool:
        return self.tok.kind == "kw" and self.tok.text == s

    def expect_sym(self, s):
        if not self.is_sym(s):
            self.error([repr(s)])
        self.i += 1

    def name(self) -> Name:
        if self.tok.kind != "name":
            self.error(["name"])
        n = Name(self.tok.text)
        self.i += 1
        return n

    def at_input(self) -> bool:
        return (self.tok.kind == "name" and self.peek().kind == "sym"
                and self.peek().text == "?")

    # -- productions --

    def process(self) -> Process:
        comps = [self.sumterm()]
        while self.is_sym("|"):
            self.i += 1
            comps.append(self.sumterm())
        return comps[0] if len(comps) == 1 else Par(tuple(comps))

    def sumterm(self) -> Process:
        if self.at_input():
            branches = [self.input()]
            while self.is_sym("+"):
                self.i += 1
                if not self.at_input():
                    self.error(["input prefix"])
                branches.append(self.input())
            return Sum(tuple(branches))
        return self.atom()

    def atom(self) -> Process:
        t = self.tok
        if t.kind == "zero":
            self.i += 1
            return NIL
        if t.kind == "name":
            nxt = self.peek()
            if nxt.kind == "sym" and nxt.text == "!":
                return self.output()
            if nxt.kind == "sym" and nxt.text == "?":
                return Sum((self.input(),))
            self.i += 1
            self.error(["'!'", "'?'"])
        if self.is_sym("*"):
            self.i += 1
            if not self.at_input():
                self.error(["input prefix"])
            b = self.input()
            return Repl(b.subject, b.params, b.cont)
        if self.is_kw("new"):
            return self.restrict()
        if self.is_kw("unit"):
            return self.workunit()
        if self.is_sym("("):
            self.i += 1
            p = self.process()
            self.expect_sym(")")
            return p
        self.error(["'0'", "name", "'*'", "'new'", "'unit'", "'('"])

    def names_list(self) -> tuple[Name, ...]:
        self.expect_sym("(")
        out = []
        if not self.is_sym(")"):
            out.append(self.name())
            while self.is_sym(","):
                self.i += 1
                out.append(self.name())
        if not self.is_sym(")"):
            self.error(["','", "')'"])
        self.i += 1
        return tuple(out)

    def output(self) -> Output:
        subject = self.name()
        self.expect_sym("!")
        return Output(subject, self.names_list())

    def input(self) -> InputBranch:
        subject = self.name()
        self.expect_sym("?")
        params = self.names_list()
        self.expect_sym(".")
        return InputBranch(subject, params, self.prefix())

    def prefix(self) -> Process:
        # '.' binds tighter than '+', so a continuation holds a single input
        if self.at_input():
            return Sum((self.input(),))
        return self.atom()

    def restrict(self) -> Process:
        self.i += 1
        bound = [self.name()]
        while self.is_sym(","):
            self.i += 1
            bound.append(self.name())
        if not self.is_kw("in"):
            self.error(["','", "'in'"])
        self.i += 1
        body = self.process()
        for b in reversed(bound):
            body = Restrict(b, body)
        return body

    def workunit(self) -> Process:
        self.i += 1
        unit = None
        if self.tok.kind == "name":
            unit = self.name()
        self.expect_sym("{")
        body = self.process()
        self.expect_sym(";")
        handler = self.process()
        self.expect_sym("}")
        if unit is not None:
            return Workunit(body, handler, unit)
        return self.anonymous(body, handler)

    def anonymous(self, body, handler):
        z = Name(ANON_UNIT, self.anon)
        self.anon += 1
        return Restrict(z, Workunit(body, handler, z))


def parse(text: str) -> Process:
    """Parse ``.wpi`` source, raising :class:`ParseError` on the first error."""
    p = _Parser(text)
    proc = p.process()
    if p.tok.kind != "eof":
        p.error(["'|'", "end of input"])
    return proc


def anonymous_unit(body: Process, handler: Process) -> Process:
    """The shortcut unit: ``(z)<body ; handler>_z`` with ``z`` fresh."""
    from .terms import fresh_reserved
    z = fresh_reserved(ANON_UNIT, all_names(body) | all_names(handler))
    return Restrict(z, Workunit(body, handler, z))


# -- printing -----------------------------------------------------------------

def _is_anonymous(p) -> bool:
    return (isinstance(p, Restrict) and p.bound.reserved
            and isinstance(p.body, Workunit) and p.body.unit == p.bound
            and p.bound not in p.body.body.fn | p.body.handler.fn)


class _Printer:
    def display(self, n: Name, env) -> str:
        return env.get(n, str(n))

    def bind(self, binders, body, env):
        """Pick printable spellings for ``binders`` that capture nothing."""
        env = dict(env)
        free_disp = {self.display(n, env) for n in body.fn if n not in binders}
        chosen = []
        for b in binders:
            d = b.text
            while d in free_disp or d in chosen:
                d += "'"
            chosen.append(d)
            env[b] = d
        return env, chosen

    def names(self, ns, env):
        return ", ".join(self.display(n, env) for n in ns)

    def proc(self, p, env, tail: bool) -> str:
        """``tail``: nothing follows this text before a closing delimiter."""
        if isinstance(p, Nil):
            return "0"
        if isinstance(p, Output):
            return f"{self.display(p.subject, env)}!({self.names(p.args, env)})"
        if isinstance(p, Sum):
            n = len(p.branches)
            return " + ".join(self.branch(b, env, tail and i == n - 1)
                              for i, b in enumerate(p.branches))
        if isinstance(p, Repl):
            env2, ds = self.bind(p.params, p.body, env)
            return (f"*{self.display(p.subject, env)}?({', '.join(ds)})."
                    + self.prefix(p.body, env2, tail))
        if isinstance(p, Par):
            n = len(p.components)
            parts = []
            for i, c in enumerate(p.components):
                last = i == n - 1
                if isinstance(c, Par) or (isinstance(c, Restrict) and not last
                                          and not _is_anonymous(c)):
                    parts.append(f"({self.proc(c, env, True)})")
                else:
                    parts.append(self.proc(c, env, tail and last))
            return " | ".join(parts)
        if isinstance(p, Workunit):
            return (f"unit {self.display(p.unit, env)} "
                    f"{{ {self.proc(p.body, env, True)} ; "
                    f"{self.proc(p.handler, env, True)} }}")
        if isinstance(p, Restrict):
            if _is_anonymous(p):
                w = p.body
                return (f"unit {{ {self.proc(w.body, env, True)} ; "
                        f"{self.proc(w.handler, env, True)} }}")
            binders = []
            q = p
            while isinstance(q, Restrict) and not _is_anonymous(q):
                binders.append(q.bound)
                q = q.body
            env2, ds = self.bind(binders, q, env)
            text = f"new {', '.join(ds)} in {self.proc(q, env2, True)}"
            return text if tail else f"({text})"
        raise TypeError(f"not a process: {p!r}")

    def branch(self, b: InputBranch, env, tail) -> str:
        env2, ds = self.bind(b.params, b.cont, env)
        return (f"{self.display(b.subject, env)}?({', '.join(ds)})."
                + self.prefix(b.cont, env2, tail))

    def prefix(self, p, env, tail) -> str:
        if isinstance(p, Par) or (isinstance(p, Sum) and len(p.branches) > 1):
            return f"({self.proc(p, env, True)})"
        if isinstance(p, Restrict) and not _is_anonymous(p) and not tail:
            return f"({self.proc(p, env, True)})"
        return self.proc(p, env, tail)


def pretty(p: Process) -> str:
    """Canonical text for ``p`` with minimal parentheses."""
    return _Printer().proc(p, {}, True)
