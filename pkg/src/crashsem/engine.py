"""Grounding and stable-model search for programs of strict rules and defaults.

A default ``A : B [C1, ..., Ck]`` has justification ``B & C1 & ... & Ck``.
Relative to a candidate set ``M`` it survives the reduct iff no complement of
a justification literal is in ``M``; survivors become the definite rule
``A -> B``.  ``p`` and ``-p`` are distinct atoms and a model containing both
is rejected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .logic import Fn, KBError, Lit, Rule, Shift, Var, match_lit, subst_lit, lit_vars


@dataclass(frozen=True)
class GroundRule:
    body: tuple[Lit, ...]
    head: tuple[Lit, ...]
    justification: tuple[Lit, ...] = ()
    default: bool = False
    origin: Rule | None = field(default=None, compare=False)

    def __str__(self) -> str:
        body = " & ".join(map(str, self.body))
        head = " & ".join(map(str, self.head))
        if not self.default:
            return f"{body} -> {head}" if body else head
        return f"{body or 'true'} : {head} [{', '.join(map(str, self.justification[len(self.head):]))}]"


@dataclass
class GroundProgram:
    rules: list[GroundRule]

    @property
    def atoms(self) -> list[Lit]:
        seen: dict[Lit, None] = {}
        for r in self.rules:
            for lit in r.body + r.head + r.justification:
                seen.setdefault(lit, None)
        return sorted(seen)

    @property
    def defaults(self) -> list[GroundRule]:
        return [r for r in self.rules if r.default]

    @property
    def strict(self) -> list[GroundRule]:
        return [r for r in self.rules if not r.default]

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class Domain:
    """Constants per sort for cartesian grounding; ``time`` bounds the offset guard."""

    sorts: dict[str, tuple] = field(default_factory=dict)

    @property
    def time_bounds(self) -> tuple[int, int] | None:
        ts = self.sorts.get("time")
        if not ts:
            return None
        return min(ts), max(ts)


class LeastModel(NamedTuple):
    literals: frozenset[Lit]
    consistent: bool


# --- grounding -----------------------------------------------------------


def _time_ok(lit: Lit, bounds: tuple[int, int] | None, shifted: set[int]) -> bool:
    if bounds is None:
        return True
    lo, hi = bounds
    for i in shifted:
        v = lit.args[i]
        if not isinstance(v, int) or v < lo or v > hi:
            return False
    return True


def _shift_positions(lit: Lit) -> set[int]:
    return {i for i, a in enumerate(lit.args) if isinstance(a, Shift)}


def _instance(rule: Rule, b: dict, bounds) -> GroundRule | None:
    parts = []
    for group in (rule.body, rule.head):
        out = []
        for lit in group:
            g = subst_lit(lit, b)
            if not _time_ok(g, bounds, _shift_positions(lit)):
                return None
            out.append(g)
        parts.append(tuple(out))
    body, head = parts
    # a blocker outside the time range is never contradicted: drop just that literal
    blockers = tuple(
        g for g, lit in ((subst_lit(l, b), l) for l in rule.blockers) if _time_ok(g, bounds, _shift_positions(lit))
    )
    if rule.is_default:
        return GroundRule(body, head, head + blockers, True, rule)
    return GroundRule(body, head, (), False, rule)


class _Index:
    def __init__(self):
        self.by_key: dict[tuple, list[Lit]] = {}
        self.all: set[Lit] = set()

    def add(self, lit: Lit) -> bool:
        if lit in self.all:
            return False
        self.all.add(lit)
        self.by_key.setdefault((lit.pred, lit.neg, len(lit.args)), []).append(lit)
        return True

    def candidates(self, pattern: Lit) -> list[Lit]:
        return self.by_key.get((pattern.pred, pattern.neg, len(pattern.args)), [])


def _body_order(body: Sequence[Lit]) -> list[Lit]:
    # literals whose shifted variables are bound elsewhere go last
    plain = [l for l in body if not _shift_positions(l)]
    shifted = [l for l in body if _shift_positions(l)]
    return plain + shifted


def _bindings(body: Sequence[Lit], index: _Index) -> Iterable[dict]:
    def rec(i: int, b: dict):
        if i == len(body):
            yield b
            return
        for cand in list(index.candidates(body[i])):
            nb = match_lit(body[i], cand, b)
            if nb is not None:
                yield from rec(i + 1, nb)

    yield from rec(0, {})


def _var_sorts(rule: Rule, sorts: dict[str, dict]) -> dict[str, str]:
    out: dict[str, str] = {}

    def walk(term, path, decl):
        if isinstance(term, (Var, Shift)):
            name = term.name if isinstance(term, Var) else term.var
            s = decl.get(path)
            if s is not None:
                out.setdefault(name, s)
        elif isinstance(term, Fn):
            for j, a in enumerate(term.args, 1):
                walk(a, path + (j,), decl)

    for lit in rule.body + rule.head + rule.blockers:
        decl = sorts.get(lit.pred, {})
        for i, a in enumerate(lit.args, 1):
            walk(a, (i,), decl)
    return out


def ground(
    rules: Iterable[Rule],
    facts: Iterable[Lit] = (),
    domain: Domain | None = None,
    sorts: dict[str, dict] | None = None,
    prune: bool = True,
) -> GroundProgram:
    """Instantiate ``rules`` into a propositional program.

    With ``prune=True`` variables are bound by joining rule bodies against the
    atoms that are derivable when every blocker is ignored; instances whose
    body can never hold are not generated.  With ``prune=False`` every
    variable ranges over its sort's constants in ``domain`` (sorts come from
    ``#sort`` declarations) and every combination is kept.

    Instances whose shifted time arguments fall outside the ``time`` sort's
    range are dropped in both modes.
    """
    rules = list(rules)
    facts = list(facts)
    domain = domain or Domain()
    bounds = domain.time_bounds
    out: list[GroundRule] = [GroundRule((), (f,)) for f in facts]

    if not prune:
        for rule in rules:
            vs = sorted(set().union(set(), *(lit_vars(l) for l in rule.body + rule.head + rule.blockers)))
            vsorts = _var_sorts(rule, sorts or {})
            pools = []
            for v in vs:
                s = vsorts.get(v)
                if s is None:
                    raise KBError(f"cannot infer sort of variable {v} in rule {rule}", rule.line)
                pool = domain.sorts.get(s, ())
                if not pool:
                    raise KBError(f"empty domain for sort {s!r} (variable {v} in rule {rule})", rule.line)
                pools.append(pool)
            for combo in itertools.product(*pools):
                gr = _instance(rule, dict(zip(vs, combo)), bounds)
                if gr is not None:
                    out.append(gr)
        return GroundProgram(out)

    index = _Index()
    for f in facts:
        index.add(f)
    ordered = [(_body_order(r.body), r) for r in rules]
    seen: set[GroundRule] = set()
    changed = True
    while changed:
        changed = False
        for body, rule in ordered:
            for b in list(_bindings(body, index)):
                gr = _instance(rule, b, bounds)
                if gr is None or gr in seen:
                    continue
                bad = [h for h in gr.head + gr.justification if any(_unbound(a) for a in h.args)]
                if bad:
                    raise KBError(f"unsafe variable left in {bad[0]} of rule {rule}", rule.line)
                seen.add(gr)
                out.append(gr)
                for h in gr.head:
                    if index.add(h):
                        changed = True
    return GroundProgram(out)


def _unbound(t) -> bool:
    if isinstance(t, (Var, Shift)):
        return True
    if isinstance(t, Fn):
        return any(_unbound(a) for a in t.args)
    return False


# --- reduct and least model ---------------------------------------------


def reduct(program: GroundProgram, candidate: Iterable[Lit]) -> list[tuple[tuple[Lit, ...], tuple[Lit, ...]]]:
    """Gelfond-Lifschitz style reduct: definite rules ``(body, head)``."""
    cand = set(candidate)
    out = []
    for r in program.rules:
        if r.default and any(j.complement() in cand for j in r.justification):
            continue
        out.append((r.body, r.head))
    return out


def least_model(definite: Iterable[tuple[Sequence[Lit], Sequence[Lit]]]) -> LeastModel:
    """Least set closed under the rules, by counter-based forward chaining."""
    rules = [(tuple(b), tuple(h)) for b, h in definite]
    waiting: dict[Lit, list[int]] = {}
    missing = []
    model: set[Lit] = set()
    queue: list[Lit] = []
    for i, (body, head) in enumerate(rules):
        need = set(body)
        missing.append(len(need))
        for lit in need:
            waiting.setdefault(lit, []).append(i)
        if not need:
            queue.extend(head)
    while queue:
        lit = queue.pop()
        if lit in model:
            continue
        model.add(lit)
        for i in waiting.get(lit, ()):
            missing[i] -= 1
            if missing[i] == 0:
                queue.extend(rules[i][1])
    consistent = not any(l.complement() in model for l in model if not l.neg)
    return LeastModel(frozenset(model), consistent)


# --- stable models ------------------------------------------------------


class _Solver:
    def __init__(self, program: GroundProgram):
        self.strict = [(r.body, r.head) for r in program.rules if not r.default]
        self.defaults = [r for r in program.rules if r.default]
        self.defeaters = [tuple(j.complement() for j in d.justification) for d in self.defaults]
        self.models: set[frozenset[Lit]] = set()

    def closure(self, chosen: Iterable[int]) -> LeastModel:
        rules = list(self.strict)
        rules.extend((self.defaults[i].body, self.defaults[i].head) for i in chosen)
        return least_model(rules)

    def blocked(self, i: int, lits: frozenset[Lit]) -> bool:
        return any(c in lits for c in self.defeaters[i])

    def search(self, assign: dict[int, bool]) -> None:
        n = len(self.defaults)
        while True:
            lower = self.closure(i for i, v in assign.items() if v)
            if not lower.consistent:
                return
            upper = self.closure(i for i in range(n) if assign.get(i, True))
            forced = False
            for i in range(n):
                if self.blocked(i, lower.literals):
                    if assign.get(i) is True:
                        return
                    if i not in assign:
                        assign[i] = False
                        forced = True
                elif not self.blocked(i, upper.literals):
                    if assign.get(i) is False:
                        return
                    if i not in assign:
                        assign[i] = True
                        forced = True
            if not forced:
                break
        free = [i for i in range(n) if i not in assign]
        if not free:
            m = lower.literals
            if all(self.blocked(i, m) != v for i, v in assign.items()):
                self.models.add(m)
            return
        i = free[0]
        self.search({**assign, i: True})
        self.search({**assign, i: False})


def _order_key(model: frozenset[Lit]) -> list[str]:
    return sorted(str(l) for l in model)


def stable_models(program: GroundProgram) -> list[frozenset[Lit]]:
    """All consistent ``M`` with ``M == least_model(reduct(program, M))``, sorted."""
    solver = _Solver(program)
    solver.search({})
    return sorted(solver.models, key=_order_key)


def is_stable(program: GroundProgram, candidate: Iterable[Lit]) -> bool:
    cand = frozenset(candidate)
    lm = least_model(reduct(program, cand))
    return lm.consistent and lm.literals == cand


def solve(rules: Iterable[Rule], facts: Iterable[Lit] = (), domain: Domain | None = None) -> list[frozenset[Lit]]:
    return stable_models(ground(rules, facts, domain))
