"""Road-norm knowledge base: ontology, loader/validator, kernel and duty reasoning."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .engine import Domain, ground, stable_models
from .logic import Fn, KBError, Lit, Program, Var, parse_kb

KERNEL_PREDICATES = frozenset({"arrêter", "contrôle", "démarrer", "reculer", "rouler_lentement"})
KERNEL_COMBINED = frozenset({"cause_perturbation_anormale"})
MODAL_PREDICATES = frozenset({"doit", "en_mesure"})
ONTOLOGY_PREDICATES = {"action": 1, "effet": 1, "raison_pot": 2, "incompatible": 2}
DOMAIN_PREDICATES = {"agent": 1, "time": 1}
INPUT_PREDICATES = {"vrai": 3}
ANOMALY = Lit("Vraie_An")


class NoModelError(RuntimeError):
    pass


@dataclass
class Ontology:
    actions: set[str] = field(default_factory=set)
    effects: set[str] = field(default_factory=set)
    raison_pot: set[tuple[str, str]] = field(default_factory=set)
    incompatible: set[tuple] = field(default_factory=set)

    def __post_init__(self):
        self.close()

    def close(self) -> None:
        """Symmetric incompatibility plus ``incompatible(E, non(E))`` for every effect."""
        pairs = set(self.incompatible)
        for e in self.effects:
            pairs.add((e, Fn("non", (e,))))
        pairs |= {(b, a) for a, b in pairs}
        self.incompatible = pairs

    def facts(self) -> list[Lit]:
        out = [Lit("action", (a,)) for a in self.actions]
        out += [Lit("effet", (e,)) for e in self.effects]
        out += [Lit("raison_pot", p) for p in self.raison_pot]
        out += [Lit("incompatible", p) for p in self.incompatible]
        return sorted(out)


def parse_ontology(text: str, source: str = "<ontology>") -> Ontology:
    onto = Ontology()
    raw_incompatible = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *rest = line.split()
        if kind == "action" and len(rest) == 1:
            onto.actions.add(rest[0])
        elif kind == "effet" and len(rest) == 1:
            onto.effects.add(rest[0])
        elif kind == "raison_pot" and len(rest) == 2:
            onto.raison_pot.add((rest[0], rest[1]))
        elif kind == "incompatible" and len(rest) == 2:
            raw_incompatible.add((rest[0], rest[1]))
        else:
            raise KBError(f"unrecognised ontology entry {line!r}", lineno, source)
    for act, eff in sorted(onto.raison_pot):
        if act not in onto.actions:
            raise KBError(f"raison_pot uses undeclared action {act!r}", source=source)
        if eff not in onto.effects:
            raise KBError(f"raison_pot uses undeclared effect {eff!r}", source=source)
    for pair in sorted(raw_incompatible):
        for e in pair:
            if e not in onto.effects:
                raise KBError(f"incompatible uses undeclared effect {e!r}", source=source)
    onto.incompatible = raw_incompatible
    onto.close()
    return onto


def load_ontology(path: str | Path) -> Ontology:
    path = Path(path)
    return parse_ontology(path.read_text(encoding="utf-8"), str(path))


@dataclass
class NormKB:
    program: Program
    ontology: Ontology

    @property
    def rules(self):
        return self.program.rules

    def stage(self, name: str):
        return self.program.stage(name)


def _effect_declared(term, onto: Ontology) -> bool:
    if isinstance(term, Var):
        return True
    if isinstance(term, str):
        return term in onto.effects
    if isinstance(term, Fn) and term.name in ("non", "combine") and term.args:
        return _effect_declared(term.args[0], onto)
    return False


def validate_norm_kb(program: Program, onto: Ontology, source: str | None = None) -> None:
    declared = set(program.sorts) | set(ONTOLOGY_PREDICATES) | set(DOMAIN_PREDICATES) | set(INPUT_PREDICATES)
    declared |= {h.pred for r in program.rules for h in r.head}
    for r in program.rules:
        for lit in r.body + r.head + r.blockers:
            if lit.pred in MODAL_PREDICATES and lit.args and not _effect_declared(lit.args[0], onto):
                raise KBError(f"undeclared effect in {lit}", r.line, source)
        for b in r.blockers:
            if b.pred not in declared:
                raise KBError(f"blocker {b} uses undeclared predicate {b.pred!r}", r.line, source)
        if not r.provenance:
            warnings.warn(f"{source or 'kb'}:{r.line}: rule without provenance tag: {r}", stacklevel=2)


def load_norm_kb(rules_path: str | Path, ontology_path: str | Path) -> NormKB:
    program = parse_kb(rules_path)
    onto = load_ontology(ontology_path)
    validate_norm_kb(program, onto, str(rules_path))
    return NormKB(program, onto)


VRAI_SORTS = {(1, 2): "agent", (2,): "agent", (3,): "time"}


def _at(term, path):
    for k in path:
        if not isinstance(term, Fn) or k > len(term.args):
            return None
        term = term.args[k - 1]
    return term


def domain_facts(literals: Iterable[Lit], headroom: int = 1, sorts: dict | None = None) -> list[Lit]:
    """``agent/1`` for every constant at an agent position, ``time/1`` for 1..Tmax+headroom."""
    literals = list(literals)
    sorts = sorts or {"vrai": VRAI_SORTS}
    agents, times = set(), []
    for l in literals:
        for path, sort in sorts.get(l.pred, {}).items():
            v = _at(Fn(l.pred, l.args), path)
            if sort == "agent" and isinstance(v, str):
                agents.add(v)
            elif sort == "time" and isinstance(v, int):
                times.append(v)
    tmax = max(times, default=1)
    out = [Lit("agent", (a,)) for a in agents]
    out += [Lit("time", (t,)) for t in range(1, tmax + headroom + 1)]
    return sorted(out)


def reasoning_domain(literals: Iterable[Lit], onto: Ontology, headroom: int = 1) -> Domain:
    facts = domain_facts(literals, headroom)
    agents = tuple(sorted(f.args[0] for f in facts if f.pred == "agent"))
    times = tuple(f.args[0] for f in facts if f.pred == "time")
    effects = tuple(sorted(onto.effects)) + tuple(Fn("non", (e,)) for e in sorted(onto.effects))
    return Domain({"agent": agents, "time": times, "effect": effects, "action": tuple(sorted(onto.actions))})


def program_facts(literals: Iterable[Lit], kb: NormKB, headroom: int = 1) -> list[Lit]:
    literals = sorted(set(literals))
    return literals + domain_facts(literals, headroom) + kb.ontology.facts()


def reason(literals: Iterable[Lit], kb: NormKB, rules=None, headroom: int = 1) -> list[frozenset]:
    """Stable models of ``rules`` (default: the whole KB) over the report's literals."""
    literals = list(literals)
    rules = kb.rules if rules is None else rules
    domain = reasoning_domain(literals, kb.ontology, headroom)
    prog = ground(rules, program_facts(literals, kb, headroom), domain)
    return stable_models(prog)


def _unique(models: list[frozenset], what: str) -> frozenset:
    if not models:
        raise NoModelError(f"{what}: no stable model (inconsistent facts)")
    return frozenset.intersection(*models)


def kernel_closure(facts: Iterable[Lit], kb: NormKB, headroom: int = 1) -> frozenset:
    """Close the semantic literals under the kernel-reduction rules."""
    return _unique(reason(facts, kb, kb.stage("kernel"), headroom), "kernel closure")


def duty_and_capacity(kernel: Iterable[Lit], kb: NormKB, headroom: int = 1) -> frozenset:
    """Duties, availability, capacities and the anomaly rule over a kernel closure."""
    return _unique(reason(kernel, kb, kb.stage("duty"), headroom), "duty and capacity")


def is_kernel_literal(lit: Lit) -> bool:
    if lit.pred in MODAL_PREDICATES:
        return True
    if lit.pred != "vrai" or not lit.args:
        return False
    p = lit.args[0]
    if isinstance(p, Fn) and p.name == "non" and p.args:
        p = p.args[0]
    if isinstance(p, str):
        return p in KERNEL_PREDICATES
    return isinstance(p, Fn) and p.name == "combine" and p.args[0] in KERNEL_COMBINED
