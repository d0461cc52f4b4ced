"""``webpi`` command-line driver.

Exit codes: 0 pass, 1 property failure / not congruent / violations,
2 input error, 3 inconclusive (exploration truncated).
"""

from __future__ import annotations

import argparse
from collections import Counter
from dataclasses import asdict, dataclass, field
import json
import random
import sys

from .congruence import congruent, normalize
from .explore import (
    ExploreLimits, InconclusiveError, check_always_terminal, check_observed,
    classify_terminal, explore, to_dot, to_json,
)
from .reduction import apply, redexes
from .syntax import ParseError, parse, pretty
from .terms import Name, arity_warnings, well_formed

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class InputError(Exception):
    pass


def load(path: str):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from e
    try:
        p = parse(text)
    except ParseError as e:
        raise InputError(f"{path}:{e}") from e
    return p


def load_checked(path: str, out):
    p = load(path)
    violations = well_formed(p)
    for v in violations:
        print(f"{path}: violation: {v}", file=out)
    return p, violations


@dataclass
class RunReport:
    steps: int
    histogram: dict[str, int]
    classification: str
    seed: int
    strategy: str
    final: str
    trace: list[str] = field(default_factory=list)

    def text(self) -> str:
        hist = ", ".join(f"{k}={self.histogram[k]}" for k in ("COM", "REP", "FAIL"))
        return (f"steps: {self.steps}\nrules: {hist}\n"
                f"final: {self.final}\nclassification: {self.classification}\n"
                f"seed: {self.seed}")


def run(p, strategy="first", seed=0, max_steps=1000) -> RunReport:
    rng = random.Random(seed)
    nf = normalize(p)
    hist = Counter({"COM": 0, "REP": 0, "FAIL": 0})
    taken = 0
    trace = []
    while True:
        rs = redexes(nf)
        if not rs:
            classification = classify_terminal(nf)
            break
        if taken >= max_steps:
            classification = "budget-exhausted"
            break
        r = rs[0] if strategy == "first" else rng.choice(rs)
        trace.append(str(r))
        nf = apply(nf, r)
        hist[r.rule] += 1
        taken += 1
    return RunReport(taken, dict(hist), classification, seed, strategy,
                     pretty(nf.term), trace)


# -- subcommands --------------------------------------------------------------

def cmd_check(args, out, inp):
    p, violations = load_checked(args.file, out)
    for w in arity_warnings(p):
        print(f"{args.file}: warning: {w}", file=out)
    if violations:
        return EXIT_FAIL
    print(f"{args.file}: ok", file=out)
    return EXIT_OK


def cmd_nf(args, out, inp):
    p, violations = load_checked(args.file, out)
    if violations:
        return EXIT_FAIL
    nf = normalize(p, trace=args.trace)
    print(pretty(nf.term), file=out)
    if args.trace:
        for step in nf.trace:
            print(step, file=out)
    return EXIT_OK


def cmd_step(args, out, inp):
    p, violations = load_checked(args.file, out)
    if violations:
        return EXIT_FAIL
    nf = normalize(p)
    while True:
        print(f"state: {pretty(nf.term)}", file=out)
        rs = redexes(nf)
        if not rs:
            print(f"terminal: {classify_terminal(nf)}", file=out)
            return EXIT_OK
        for i, r in enumerate(rs):
            print(f"  [{i}] {r}", file=out)
        while True:
            print("choose> ", end="", file=out)
            out.flush()
            line = inp.readline()
            if not line or line.strip() == "q":
                return EXIT_OK
            try:
                k = int(line.strip())
            except ValueError:
                k = -1
            if 0 <= k < len(rs):
                break
            print(f"no redex {line.strip()!r}; pick 0..{len(rs) - 1} or q", file=out)
        nf = apply(nf, rs[k])


def cmd_run(args, out, inp):
    p, violations = load_checked(args.file, out)
    if violations:
        return EXIT_FAIL
    report = run(p, args.strategy, args.seed, args.max_steps)
    if args.json:
        print(json.dumps(asdict(report), indent=2), file=out)
    else:
        print(report.text(), file=out)
    return EXIT_OK


def _requirement(req: str):
    if req == "committed":
        return "committed", lambda g: check_always_terminal(
            g, lambda nf: classify_terminal(nf) == "committed")
    if req == "no-stuck":
        return "no-stuck", lambda g: check_always_terminal(
            g, lambda nf: classify_terminal(nf) != "stuck")
    if req.startswith("observed:"):
        name = req.split(":", 1)[1]
        try:
            n = Name(name)
        except ValueError:
            raise InputError(f"bad name in --require {req}")
        return req, lambda g: check_observed(g, n)
    raise InputError(f"unknown requirement {req!r}")


def cmd_explore(args, out, inp):
    p, violations = load_checked(args.file, out)
    if violations:
        return EXIT_FAIL
    checks = [_requirement(r) for r in args.require]
    limits = ExploreLimits(args.max_states, args.max_depth, args.max_seconds)
    g = explore(p, limits, workers=args.workers)
    print(f"states: {len(g.states)}  edges: {len(g.edges)}  "
          f"terminals: {len(g.terminals())}", file=out)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as f:
            f.write(to_dot(g))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            f.write(to_json(g))
    if g.frontier_truncated:
        print(f"truncated: {', '.join(g.limits_hit)}", file=out)
        if checks:
            for label, _ in checks:
                print(f"{label}: inconclusive", file=out)
        return EXIT_INCONCLUSIVE
    code = EXIT_OK
    for label, check in checks:
        try:
            res = check(g)
        except InconclusiveError:
            return EXIT_INCONCLUSIVE
        if res.holds:
            print(f"{label}: holds", file=out)
            continue
        code = EXIT_FAIL
        print(f"{label}: counterexample ({len(res.path)} steps)", file=out)
        print(f"  {pretty(g.states[g.initial].term)}", file=out)
        for e in res.path:
            print(f"  --{e.rule}--> {pretty(g.states[e.target].term)}", file=out)
    return code


def cmd_eq(args, out, inp):
    a, va = load_checked(args.file_a, out)
    b, vb = load_checked(args.file_b, out)
    if va or vb:
        return EXIT_INPUT
    same = congruent(a, b)
    print("congruent" if same else "not congruent", file=out)
    return EXIT_OK if same else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="webpi", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", help="parse and check well-formedness")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("nf", help="print the structural normal form")
    s.add_argument("file")
    s.add_argument("--trace", action="store_true", help="list the axioms applied")
    s.set_defaults(func=cmd_nf)

    s = sub.add_parser("step", help="interactively choose reductions")
    s.add_argument("file")
    s.set_defaults(func=cmd_step)

    s = sub.add_parser("run", help="run to a terminal state")
    s.add_argument("file")
    s.add_argument("--strategy", choices=["first", "random"], default="first")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-steps", type=int, default=1000)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("explore", help="exhaustive state-space exploration")
    s.add_argument("file")
    s.add_argument("--max-states", type=int, default=100_000)
    s.add_argument("--max-depth", type=int, default=1000)
    s.add_argument("--max-seconds", type=float, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--dot", metavar="PATH")
    s.add_argument("--json", metavar="PATH")
    s.add_argument("--require", action="append", default=[],
                   metavar="committed|no-stuck|observed:NAME")
    s.set_defaults(func=cmd_explore)

    s = sub.add_parser("eq", help="test structural congruence of two files")
    s.add_argument("file_a")
    s.add_argument("file_b")
    s.set_defaults(func=cmd_eq)
    return ap


def main(argv=None, out=None, inp=None) -> int:
    out = out or sys.stdout
    inp = inp or sys.stdin
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out, inp)
    except InputError as e:
        print(f"error: {e}", file=out)
        return EXIT_INPUT
    except ValueError as e:
        # bad limits and the like
        print(f"error: {e}", file=out)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
