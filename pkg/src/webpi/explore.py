"""Bounded breadth-first state-space construction and terminal checks."""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import hashlib
import json
import time
from typing import Callable, Literal

from .congruence import NormalForm, normalize, split_region
from .reduction import Redex, Step, redexes, steps
from .syntax import parse, pretty
from .terms import Name, Nil, Output, Process, Repl

Terminal = Literal["committed", "quiescent", "stuck"]


@dataclass(frozen=True)
class ExploreLimits:
    max_states: int = 100_000
    max_depth: int = 1000
    max_seconds: float | None = None

    def __post_init__(self):
        if self.max_states <= 0 or self.max_depth <= 0:
            raise ValueError("limits must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class Edge:
    source: str
    rule: str
    target: str
    redex: Redex | None = field(default=None, compare=False)
    consumed: frozenset[Name] = field(default=frozenset(), compare=False)
    produced: frozenset[Name] = field(default=frozenset(), compare=False)

    def observes(self, name: Name) -> bool:
        return name in self.consumed or name in self.produced


@dataclass
class StateGraph:
    states: dict[str, NormalForm]
    edges: list[Edge]
    initial: str
    frontier_truncated: bool = False
    limits_hit: list[str] = field(default_factory=list)

    def successors(self, key: str) -> list[Edge]:
        return self._adjacency().get(key, [])

    def _adjacency(self):
        adj: dict[str, list[Edge]] = {}
        for e in self.edges:
            adj.setdefault(e.source, []).append(e)
        return adj

    def terminals(self) -> list[str]:
        adj = self._adjacency()
        return [k for k in self.states if not adj.get(k)]

    def __eq__(self, other):
        return (isinstance(other, StateGraph)
                and list(self.states) == list(other.states)
                and self.edges == other.edges
                and self.initial == other.initial
                and self.frontier_truncated == other.frontier_truncated
                and self.limits_hit == other.limits_hit)


class InconclusiveError(RuntimeError):
    """A property was checked on a truncated graph."""


def _expand(nf: NormalForm) -> list[Step]:
    return steps(nf)


def explore(p: Process | NormalForm, limits: ExploreLimits = ExploreLimits(),
            workers: int = 1) -> StateGraph:
    """Breadth-first closure of one-step reduction from ``normalize(p)``.

    States are expanded level by level; with ``workers > 1`` each level is
    expanded in a process pool and merged in frontier order, so the result
    does not depend on scheduling.
    """
    start = p if isinstance(p, NormalForm) else normalize(p)
    t0 = time.monotonic()
    states = {start.canonical_key: start}
    edges: list[Edge] = []
    hit: list[str] = []
    frontier = [start]
    depth = 0
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while frontier:
            if depth >= limits.max_depth:
                if any(redexes(nf) for nf in frontier):
                    hit.append("max_depth")
                break
            if limits.max_seconds is not None and time.monotonic() - t0 > limits.max_seconds:
                hit.append("max_seconds")
                break
            if pool is not None:
                expanded = list(pool.map(_expand, frontier, chunksize=8))
            else:
                expanded = [_expand(nf) for nf in frontier]
            nxt = []
            for nf, out in zip(frontier, expanded):
                for s in out:
                    key = s.target.canonical_key
                    if key not in states:
                        if len(states) >= limits.max_states:
                            if "max_states" not in hit:
                                hit.append("max_states")
                            continue
                        states[key] = s.target
                        nxt.append(s.target)
                    edges.append(Edge(nf.canonical_key, s.redex.rule, key,
                                      s.redex, s.consumed, s.produced))
            if "max_states" in hit:
                break
            frontier = nxt
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return StateGraph(states, edges, start.canonical_key, bool(hit), hit)


def classify_terminal(nf: NormalForm) -> Terminal:
    if redexes(nf):
        raise ValueError("classify_terminal: state still has enabled redexes")
    _, comps = split_region(nf.term)
    if isinstance(nf.term, Nil):
        return "committed"
    if all(isinstance(c, Repl) for c in comps):
        return "quiescent"
    return "stuck"


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    path: tuple[Edge, ...] = ()
    violating: str | None = None

    def __bool__(self):
        return self.holds


def _require_complete(graph: StateGraph):
    if graph.frontier_truncated:
        raise InconclusiveError(
            f"graph truncated ({', '.join(graph.limits_hit)}); property undecided")


def _shortest_paths(graph: StateGraph, allowed: Callable[[Edge], bool] = lambda e: True):
    """BFS parents from the initial state, following canonical edge order."""
    adj = graph._adjacency()
    parent: dict[str, Edge | None] = {graph.initial: None}
    queue = deque([graph.initial])
    while queue:
        k = queue.popleft()
        for e in adj.get(k, []):
            if allowed(e) and e.target not in parent:
                parent[e.target] = e
                queue.append(e.target)
    return parent


def _path_to(parent, key) -> tuple[Edge, ...]:
    path = []
    while parent[key] is not None:
        e = parent[key]
        path.append(e)
        key = e.source
    return tuple(reversed(path))


def check_always_terminal(graph: StateGraph,
                          predicate: Callable[[NormalForm], bool]) -> CheckResult:
    """Does every reachable terminal state satisfy ``predicate``?"""
    _require_complete(graph)
    parent = _shortest_paths(graph)
    terminals = set(graph.terminals())
    for key in parent:  # BFS order, so the first violation is a shortest witness
        if key in terminals and not predicate(graph.states[key]):
            return CheckResult(False, _path_to(parent, key), key)
    return CheckResult(True)


def has_free_output(nf: NormalForm, name: Name) -> bool:
    binders, comps = split_region(nf.term)
    return name not in binders and any(
        isinstance(c, Output) and c.subject == name for c in comps)


def check_observed(graph: StateGraph, name: Name) -> CheckResult:
    """Every path to a terminal touches an output on ``name``.

    A path counts when one of its steps consumed or emitted an output on the
    free name, or when its terminal still holds such an output.
    """
    _require_complete(graph)
    parent = _shortest_paths(graph, lambda e: not e.observes(name))
    terminals = set(graph.terminals())
    for key in parent:
        if key in terminals and not has_free_output(graph.states[key], name):
            return CheckResult(False, _path_to(parent, key), key)
    return CheckResult(True)


# -- export -------------------------------------------------------------------

LABEL_CAP = 60


def _short(text: str) -> str:
    if len(text) <= LABEL_CAP:
        return text
    digest = hashlib.sha1(text.encode()).hexdigest()[:8]
    return f"{text[:LABEL_CAP]}...#{digest}"


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: StateGraph) -> str:
    ids = {k: f"s{i}" for i, k in enumerate(graph.states)}
    lines = ["digraph webpi {", "  node [shape=box, fontname=monospace];"]
    for k, nf in graph.states.items():
        shape = ", peripheries=2" if k == graph.initial else ""
        lines.append(f"  {ids[k]} [label={_dot_quote(_short(pretty(nf.term)))}{shape}];")
    for e in graph.edges:
        lines.append(f"  {ids[e.source]} -> {ids[e.target]} [label={_dot_quote(e.rule)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_dict(graph: StateGraph) -> dict:
    return {
        "states": [{"key": k, "term": pretty(nf.term)} for k, nf in graph.states.items()],
        "edges": [{"from": e.source, "rule": e.rule, "to": e.target} for e in graph.edges],
        "initial": graph.initial,
        "truncated": graph.frontier_truncated,
        "limits_hit": list(graph.limits_hit),
    }


def to_json(graph: StateGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2)


def from_json(text: str) -> StateGraph:
    """Rebuild a graph from :func:`to_json` output (edges lose redex detail)."""
    data = json.loads(text)
    states = {}
    for s in data["states"]:
        nf = normalize(parse(s["term"]))
        if nf.canonical_key != s["key"]:
            raise ValueError(f"state term does not reproduce its key: {s['term']}")
        states[s["key"]] = nf
    edges = [Edge(e["from"], e["rule"], e["to"]) for e in data["edges"]]
    return StateGraph(states, edges, data["initial"], data["truncated"],
                      list(data["limits_hit"]))
