"""Precedence/simultaneity between time references and their integer levels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, NamedTuple

from .logic import Fn, Lit


class TemporalError(ValueError):
    pass


class TemporalCycleError(TemporalError):
    def __init__(self, cycle: list):
        self.cycle = cycle
        super().__init__("precedence cycle: " + " < ".join(map(str, cycle)))


class SimulConflictError(TemporalError):
    pass


@dataclass(frozen=True)
class TemporalRelation:
    kind: str  # "prec" | "simul"
    left: Hashable
    right: Hashable

    def __post_init__(self):
        if self.kind not in ("prec", "simul"):
            raise ValueError(f"unknown temporal relation {self.kind!r}")
        if self.kind == "prec" and self.left == self.right:
            raise TemporalCycleError([self.left, self.right])

    def __str__(self) -> str:
        name = "Préc" if self.kind == "prec" else "Simul"
        return f"{name}({self.left}, {self.right})"


@dataclass
class TemporalGraph:
    nodes: list
    edges: set[tuple]
    classes: list[frozenset]
    class_of: dict = field(default_factory=dict)

    def successors(self, n) -> list:
        return [v for u, v in self.edges if u == n]

    def predecessors(self, n) -> list:
        return [u for u, v in self.edges if v == n]


def _order(nodes):
    return sorted(nodes, key=str)


def _find_cycle(nodes, succ) -> list | None:
    state: dict = {}
    for start in _order(nodes):
        if start in state:
            continue
        stack = [(start, iter(_order(succ.get(start, ()))))]
        path = [start]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                path.pop()
                continue
            if state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            if nxt not in state:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(_order(succ.get(nxt, ())))))
    return None


def build_temporal_graph(temporal: Iterable[TemporalRelation], nodes: Iterable = ()) -> TemporalGraph:
    temporal = list(temporal)
    all_nodes = dict.fromkeys(nodes)
    for t in temporal:
        all_nodes.setdefault(t.left)
        all_nodes.setdefault(t.right)
    node_list = _order(all_nodes)
    edges = {(t.left, t.right) for t in temporal if t.kind == "prec"}
    succ: dict = {}
    for u, v in edges:
        succ.setdefault(u, set()).add(v)
    cycle = _find_cycle(node_list, succ)
    if cycle:
        raise TemporalCycleError(cycle)

    parent = {n: n for n in node_list}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in temporal:
        if t.kind == "simul":
            a, b = find(t.left), find(t.right)
            if a != b:
                parent[a] = b
    groups: dict = {}
    for n in node_list:
        groups.setdefault(find(n), set()).add(n)
    classes = sorted((frozenset(g) for g in groups.values()), key=lambda c: _order(c)[0].__str__())
    class_of = {n: c for c in classes for n in c}

    # precedence inside one Simul class, or a cycle through classes, is inconsistent
    for u, v in sorted(edges, key=str):
        if class_of[u] is class_of[v]:
            raise SimulConflictError(f"{u} and {v} are simultaneous but {u} precedes {v}")
    rep = {c: _order(c)[0] for c in classes}
    qsucc: dict = {}
    for u, v in edges:
        qsucc.setdefault(rep[class_of[u]], set()).add(rep[class_of[v]])
    cycle = _find_cycle(list(rep.values()), qsucc)
    if cycle:
        raise TemporalCycleError(cycle)
    return TemporalGraph(node_list, edges, classes, class_of)


class Levels(NamedTuple):
    levels: dict
    unanchored: tuple


def compute_levels(graph: TemporalGraph) -> Levels:
    """Longest-path level over the graph with Simul classes contracted:
    a class sits one above its highest predecessor class, sources at 1.
    Classes with no precedence edge at all are reported as unanchored."""
    preds: dict = {c: set() for c in graph.classes}
    succ: dict = {c: set() for c in graph.classes}
    for u, v in graph.edges:
        cu, cv = graph.class_of[u], graph.class_of[v]
        preds[cv].add(cu)
        succ[cu].add(cv)
    key = lambda c: str(_order(c)[0])
    indeg = {c: len(preds[c]) for c in graph.classes}
    ready = sorted((c for c in graph.classes if indeg[c] == 0), key=key)
    level: dict = {}
    while ready:
        c = ready.pop(0)
        level[c] = 1 + max((level[p] for p in preds[c]), default=0)
        for d in sorted(succ[c], key=key):
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
    if len(level) != len(graph.classes):
        raise TemporalCycleError(_order(c for c in graph.classes if c not in level))
    out = {n: level[c] for c in graph.classes for n in c}
    unanchored = [n for c in graph.classes if not preds[c] and not succ[c] for n in _order(c)]
    return Levels(out, tuple(unanchored))


def _replace(t, levels: Mapping):
    if t in levels and isinstance(t, Fn):
        return levels[t]
    if isinstance(t, Fn):
        return Fn(t.name, tuple(_replace(a, levels) for a in t.args))
    return t


def is_time_ref(t) -> bool:
    return isinstance(t, Fn) and t.name == "ref_temp"


def time_refs(literals: Iterable[Lit]) -> set:
    out = set()

    def walk(t):
        if is_time_ref(t):
            out.add(t)
        elif isinstance(t, Fn):
            for a in t.args:
                walk(a)

    for lit in literals:
        for a in lit.args:
            walk(a)
    return out


def level_and_instantiate(graph: TemporalGraph, literals: Iterable[Lit]) -> tuple[frozenset, Levels]:
    """Replace every symbolic time reference in ``literals`` by its level."""
    literals = list(literals)
    missing = time_refs(literals) - set(graph.nodes)
    if missing:
        graph = build_temporal_graph(
            [TemporalRelation("prec", u, v) for u, v in graph.edges]
            + [TemporalRelation("simul", a, b) for c in graph.classes for a, b in zip(_order(c), _order(c)[1:])],
            list(graph.nodes) + _order(missing),
        )
    lv = compute_levels(graph)
    out = frozenset(Lit(l.pred, tuple(_replace(a, lv.levels) for a in l.args), l.neg) for l in literals)
    if time_refs(out):
        raise TemporalError("symbolic time reference survived instantiation")
    return out, lv
