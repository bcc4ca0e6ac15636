"""Ambiguous block grammar with relation-emitting actions, and an exhaustive chart parser.

Grammar file, one rule per line (``#`` comments)::

    PP -> SUJ GV @head=2 { sujet(head(GV), head(SUJ)) }
    N  -> tag:NOM
    ETE -> lemma:'être'

The first rule's left-hand side is the start symbol.  ``@head=k`` (1-based,
default 1) marks the head child.  Action arguments are ``head(X)``,
``head($k)``, ``head(X.Y)`` (head of the first ``Y`` constituent found inside
the ``X`` child, preorder) or a quoted constant.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence, Union

from .lexicon import Token

RELATION_ARITY = {
    "relation": 3,
    "support": 2,
    "sujet": 2,
    "objet": 2,
    "compl_v": 3,
    "compl_n": 3,
    "qualif_n": 2,
    "qualif_v": 2,
}

DEFAULT_CAP = 10_000


class GrammarError(ValueError):
    pass


class AnalysisOverflow(RuntimeError):
    pass


@dataclass(frozen=True)
class Terminal:
    kind: str  # "tag" | "lemma"
    value: str

    def matches(self, tok: Token) -> bool:
        return (tok.tag if self.kind == "tag" else tok.lemma) == self.value

    def __str__(self) -> str:
        return f"{self.kind}:{self.value}" if self.kind == "tag" else f"lemma:'{self.value}'"


Symbol = Union[str, Terminal]


@dataclass(frozen=True)
class ArgRef:
    """``head(...)`` of the rhs child at ``pos`` (0-based), optionally descending to ``path``."""

    pos: int
    path: tuple[str, ...] = ()


@dataclass(frozen=True)
class Action:
    relation: str
    args: tuple[Union[ArgRef, str], ...]


@dataclass(frozen=True)
class GrammarRule:
    lhs: str
    rhs: tuple[Symbol, ...]
    head: int = 0
    actions: tuple[Action, ...] = ()
    line: int | None = None

    def __str__(self) -> str:
        return f"{self.lhs} -> {' '.join(map(str, self.rhs))}"


@dataclass
class Grammar:
    start: str
    rules: list[GrammarRule]
    nonterminals: set[str] = field(default_factory=set)

    def __post_init__(self):
        self.nonterminals = {r.lhs for r in self.rules}
        self.by_lhs: dict[str, list[GrammarRule]] = {}
        for r in self.rules:
            self.by_lhs.setdefault(r.lhs, []).append(r)

    @property
    def actioned_rules(self) -> int:
        return sum(1 for r in self.rules if r.actions)

    @property
    def action_count(self) -> int:
        return sum(len(r.actions) for r in self.rules)

    @property
    def action_kinds(self) -> set[str]:
        return {a.relation for r in self.rules for a in r.actions}

    def __hash__(self):
        return id(self)


# --- loading ---------------------------------------------------------------

_RULE = re.compile(r"^\s*(?P<lhs>[^\W\d]\w*)\s*->\s*(?P<rhs>[^{@]*?)\s*(?:@head=(?P<head>\d+))?\s*(?:\{(?P<act>.*)\})?\s*$")
_ACTION = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")
_HEAD = re.compile(r"^head\(\s*([^)]*?)\s*\)$")


def _split_args(text: str) -> list[str]:
    args, depth, cur, quoted = [], 0, "", False
    for ch in text:
        if ch == "'" :
            quoted = not quoted
        if not quoted and ch == "(":
            depth += 1
        elif not quoted and ch == ")":
            depth -= 1
        if ch == "," and depth == 0 and not quoted:
            args.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        args.append(cur.strip())
    return args


def _parse_symbol(text: str, lineno: int) -> Symbol:
    if text.startswith("tag:"):
        if len(text) == 4:
            raise GrammarError(f"line {lineno}: empty tag terminal")
        return Terminal("tag", text[4:])
    if text.startswith("lemma:"):
        v = text[6:]
        if len(v) >= 2 and v[0] == v[-1] == "'":
            v = v[1:-1]
        if not v:
            raise GrammarError(f"line {lineno}: empty lemma terminal")
        return Terminal("lemma", v)
    if not re.fullmatch(r"[^\W\d]\w*", text):
        raise GrammarError(f"line {lineno}: bad symbol {text!r}")
    return text


def _parse_arg(text: str, rhs: tuple[Symbol, ...], lhs: str, lineno: int) -> Union[ArgRef, str]:
    if len(text) >= 2 and text[0] == text[-1] == "'":
        return text[1:-1]
    m = _HEAD.match(text)
    if not m:
        raise GrammarError(f"line {lineno}: action argument must be head(...) or a quoted constant, got {text!r}")
    ref = m.group(1)
    first, *path = ref.split(".")
    if first.startswith("$"):
        try:
            pos = int(first[1:]) - 1
        except ValueError:
            raise GrammarError(f"line {lineno}: bad positional reference {first!r}") from None
        if not 0 <= pos < len(rhs):
            raise GrammarError(f"line {lineno}: {first} out of range for rule {lhs}")
    else:
        names = [s if isinstance(s, str) else None for s in rhs]
        if first not in names:
            raise GrammarError(f"line {lineno}: action refers to {first!r}, which is not in the rule's right-hand side")
        pos = names.index(first)
    if path and not isinstance(rhs[pos], str):
        raise GrammarError(f"line {lineno}: cannot descend into terminal {rhs[pos]}")
    return ArgRef(pos, tuple(path))


def parse_grammar(text: str) -> Grammar:
    rules: list[GrammarRule] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        m = _RULE.match(line)
        if not m:
            raise GrammarError(f"line {lineno}: syntax error in {line!r}")
        rhs = tuple(_parse_symbol(s, lineno) for s in m.group("rhs").split())
        if not rhs:
            raise GrammarError(f"line {lineno}: empty productions are not allowed")
        head = int(m.group("head") or 1) - 1
        if not 0 <= head < len(rhs):
            raise GrammarError(f"line {lineno}: @head={head + 1} out of range")
        actions = []
        for chunk in (m.group("act") or "").split(";"):
            if not chunk.strip():
                continue
            am = _ACTION.match(chunk)
            if not am:
                raise GrammarError(f"line {lineno}: bad action {chunk.strip()!r}")
            name = am.group(1)
            args = _split_args(am.group(2))
            if name not in RELATION_ARITY:
                raise GrammarError(f"line {lineno}: unknown relation {name!r}")
            if len(args) != RELATION_ARITY[name]:
                raise GrammarError(
                    f"line {lineno}: action {name} takes {RELATION_ARITY[name]} arguments, got {len(args)}"
                )
            actions.append(Action(name, tuple(_parse_arg(a, rhs, m.group("lhs"), lineno) for a in args)))
        rules.append(GrammarRule(m.group("lhs"), rhs, head, tuple(actions), lineno))
    if not rules:
        raise GrammarError("grammar has no rules")
    grammar = Grammar(rules[0].lhs, rules)
    _validate(grammar)
    return grammar


def _validate(g: Grammar) -> None:
    for r in g.rules:
        for s in r.rhs:
            if isinstance(s, str) and s not in g.nonterminals:
                raise GrammarError(f"line {r.line}: nonterminal {s!r} has no rules")
        for a in r.actions:
            for arg in a.args:
                if isinstance(arg, ArgRef) and arg.path:
                    if not _may_contain(g, r.rhs[arg.pos], arg.path):
                        raise GrammarError(f"line {r.line}: no {'.'.join(arg.path)} can occur inside {r.rhs[arg.pos]}")
    # unit cycles would make the chart infinite
    unit = {nt: {r.rhs[0] for r in g.by_lhs[nt] if len(r.rhs) == 1 and isinstance(r.rhs[0], str)} for nt in g.nonterminals}
    state: dict[str, int] = {}

    def visit(nt, stack):
        state[nt] = 1
        for nxt in sorted(unit[nt]):
            if state.get(nxt) == 1:
                cyc = stack[stack.index(nxt):] + [nxt]
                raise GrammarError(f"cyclic unit rules: {' -> '.join(cyc)}")
            if nxt not in state:
                visit(nxt, stack + [nxt])
        state[nt] = 2

    for nt in sorted(g.nonterminals):
        if nt not in state:
            visit(nt, [nt])
    g.unit_order = _unit_order(g, unit)
    reach = {g.start}
    todo = [g.start]
    while todo:
        for r in g.by_lhs[todo.pop()]:
            for s in r.rhs:
                if isinstance(s, str) and s not in reach:
                    reach.add(s)
                    todo.append(s)
    for nt in sorted(g.nonterminals - reach):
        warnings.warn(f"nonterminal {nt!r} is unreachable from {g.start!r}", stacklevel=3)


def _may_contain(g: Grammar, sym: str, path: tuple[str, ...]) -> bool:
    seen, todo = set(), [sym]
    while todo:
        nt = todo.pop()
        for r in g.by_lhs.get(nt, ()):
            for s in r.rhs:
                if isinstance(s, str) and s not in seen:
                    seen.add(s)
                    todo.append(s)
    if path[0] not in seen:
        return False
    return len(path) == 1 or _may_contain(g, path[0], path[1:])


def _unit_order(g: Grammar, unit: dict[str, set[str]]) -> list[str]:
    # children before parents so a span's unit closure is computed in one pass
    order, done = [], set()

    def visit(nt):
        if nt in done:
            return
        done.add(nt)
        for c in sorted(unit[nt]):
            visit(c)
        order.append(nt)

    for nt in sorted(g.nonterminals):
        visit(nt)
    return order


def load_grammar(path: str | Path) -> Grammar:
    return parse_grammar(Path(path).read_text(encoding="utf-8"))


# --- parse trees and relations ---------------------------------------------


class Relation(NamedTuple):
    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}({', '.join(map(str, self.args))})"


RelationSet = frozenset  # of Relation


@dataclass(frozen=True)
class Tree:
    label: str
    children: tuple  # of Tree | Token
    rule: GrammarRule | None = None

    def head(self) -> Token:
        node: Tree | Token = self
        while isinstance(node, Tree):
            node = node.children[node.rule.head]
        return node

    def leaves(self) -> list[Token]:
        out = []
        for c in self.children:
            out.extend(c.leaves() if isinstance(c, Tree) else [c])
        return out

    def find(self, label: str) -> "Tree | None":
        for c in self.children:
            if isinstance(c, Tree):
                if c.label == label:
                    return c
                hit = c.find(label)
                if hit is not None:
                    return hit
        return None

    def bracketed(self) -> str:
        inner = " ".join(c.bracketed() if isinstance(c, Tree) else c.surface for c in self.children)
        return f"[{self.label} {inner}]"


@dataclass(frozen=True)
class Analysis:
    tree: Tree
    relations: frozenset


def _arg_value(arg, node: Tree):
    if isinstance(arg, str):
        return arg
    child = node.children[arg.pos]
    for label in arg.path:
        child = child.find(label) if isinstance(child, Tree) else None
        if child is None:
            return None
    return child.head() if isinstance(child, Tree) else child


def emit_relations(tree: Tree) -> frozenset:
    """Run every rule action in the tree, bottom-up."""
    out: set[Relation] = set()

    def walk(node: Tree):
        for c in node.children:
            if isinstance(c, Tree):
                walk(c)
        for act in node.rule.actions:
            vals = tuple(_arg_value(a, node) for a in act.args)
            if any(v is None for v in vals):
                continue
            out.add(Relation(act.relation, vals))

    walk(tree)
    return frozenset(out)


# --- chart ------------------------------------------------------------------


def _chart(tokens: Sequence[Token], g: Grammar):
    """``chart[(i, j)][sym]`` = list of ``(rule, splits)`` back-pointers, plus derivation counts."""
    n = len(tokens)
    chart: dict[tuple[int, int], dict[str, list]] = {}
    count: dict[tuple[str, int, int], int] = {}

    def cell(i, j):
        return chart.get((i, j), {})

    def sym_count(s, i, j):
        if isinstance(s, Terminal):
            return 1 if j == i + 1 and s.matches(tokens[i]) else 0
        return count.get((s, i, j), 0)

    def splits(rhs, k, i, j):
        """All ways rhs[k:] covers tokens[i:j] with non-empty pieces."""
        if k == len(rhs) - 1:
            return [((i, j),)] if sym_count(rhs[k], i, j) else []
        out = []
        remaining = len(rhs) - k - 1
        for m in range(i + 1, j - remaining + 1):
            if sym_count(rhs[k], i, m):
                for rest in splits(rhs, k + 1, m, j):
                    out.append(((i, m),) + rest)
        return out

    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            here: dict[str, list] = {}
            for nt in g.unit_order:
                for r in g.by_lhs[nt]:
                    if len(r.rhs) > length:
                        continue
                    for sp in splits(r.rhs, 0, i, j):
                        here.setdefault(nt, []).append((r, sp))
                if nt in here:
                    total = 0
                    for r, sp in here[nt]:
                        c = 1
                        for s, (a, b) in zip(r.rhs, sp):
                            c *= sym_count(s, a, b)
                        total += c
                    count[(nt, i, j)] = total
            chart[(i, j)] = here
    return chart, count


def count_analyses(sentence: Sequence[Token], grammar: Grammar) -> int:
    if not sentence:
        return 0
    _, count = _chart(sentence, grammar)
    return count.get((grammar.start, 0, len(sentence)), 0)


def parse(sentence: Sequence[Token], grammar: Grammar, cap: int = DEFAULT_CAP) -> list[Analysis]:
    """Every complete analysis of ``sentence``; ``[]`` when the grammar does not cover it."""
    if not sentence:
        raise ValueError("cannot parse an empty sentence")
    tokens = list(sentence)
    chart, count = _chart(tokens, grammar)
    total = count.get((grammar.start, 0, len(tokens)), 0)
    if total > cap:
        raise AnalysisOverflow(f"{total} analyses exceed the cap of {cap}")

    memo: dict[tuple[str, int, int], list[Tree]] = {}

    def trees(sym, i, j) -> list:
        if isinstance(sym, Terminal):
            return [tokens[i]]
        key = (sym, i, j)
        if key not in memo:
            out = []
            for r, sp in chart[(i, j)].get(sym, ()):
                kids = [trees(s, a, b) for s, (a, b) in zip(r.rhs, sp)]
                for combo in _product(kids):
                    out.append(Tree(sym, combo, r))
            memo[key] = out
        return memo[key]

    if not total:
        return []
    return [Analysis(t, emit_relations(t)) for t in trees(grammar.start, 0, len(tokens))]


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def distinct_relation_sets(analyses: Iterable[Analysis]) -> set[frozenset]:
    return {a.relations for a in analyses}


def group_by_relations(analyses: Iterable[Analysis]) -> dict[frozenset, list[Analysis]]:
    out: dict[frozenset, list[Analysis]] = {}
    for a in analyses:
        out.setdefault(a.relations, []).append(a)
    return out


# --- naming ------------------------------------------------------------------


def mention_names(relations: Iterable[Relation]) -> dict[Token, str]:
    """Display name per token argument: its lemma, numbered when several
    distinct occurrences of that lemma appear in the relations (``être1``, ``être2``)."""
    toks = sorted({a for r in relations for a in r.args if isinstance(a, Token)}, key=lambda t: t.position)
    by_lemma: dict[str, list[Token]] = {}
    for t in toks:
        by_lemma.setdefault(t.lemma, []).append(t)
    names = {}
    for lemma, ts in by_lemma.items():
        for k, t in enumerate(ts, 1):
            names[t] = f"{lemma}{k}" if len(ts) > 1 else lemma
    return names


def name_relations(relations: Iterable[Relation]) -> tuple[frozenset, dict[str, Token]]:
    """Replace token arguments by display names; also return name -> token."""
    relations = list(relations)
    names = mention_names(relations)
    named = frozenset(
        Relation(r.name, tuple(names[a] if isinstance(a, Token) else a for a in r.args)) for r in relations
    )
    return named, {v: k for k, v in names.items()}
