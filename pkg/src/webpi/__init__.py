"""Workbench for the webpi-infinity process calculus.

Parse, normalize modulo structural congruence, reduce, and exhaustively
explore models of web-service compositions built from long-running
transaction units.
"""

from .terms import (
    NIL, InputBranch, Name, Nil, Output, Par, Process, Repl, Restrict, Sum,
    Violation, Workunit, alpha_eq, arity_warnings, free_names, substitute,
    well_formed,
)
from .syntax import ParseError, SourceSpan, anonymous_unit, parse, pretty
from .congruence import (
    FuelExhausted, NormalForm, congruent, is_committed, nf_violations, normalize,
)
from .reduction import Redex, StaleRedex, apply, fire, redexes, step_all
from .explore import (
    CheckResult, ExploreLimits, InconclusiveError, StateGraph,
    check_always_terminal, check_observed, classify_terminal, explore,
    from_json, to_dot, to_json,
)

__all__ = [
    "NIL", "InputBranch", "Name", "Nil", "Output", "Par", "Process", "Repl",
    "Restrict", "Sum", "Violation", "Workunit", "alpha_eq", "arity_warnings",
    "free_names", "substitute", "well_formed",
    "ParseError", "SourceSpan", "anonymous_unit", "parse", "pretty",
    "FuelExhausted", "NormalForm", "congruent", "is_committed", "nf_violations",
    "normalize",
    "Redex", "StaleRedex", "apply", "fire", "redexes", "step_all",
    "CheckResult", "ExploreLimits", "InconclusiveError", "StateGraph",
    "check_always_terminal", "check_observed", "classify_terminal", "explore",
    "from_json", "to_dot", "to_json",
]
