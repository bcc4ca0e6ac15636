"""From normalized relations to reified literals with symbolic, then integer, times."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

from .engine import ground, stable_models
from .lexicon import Lexicon
from .logic import Fn, Lit, Rule, combine
from .normalize import VoiceFact, base_lemma
from .parser import Relation
from .temporal import TemporalRelation

log = logging.getLogger(__name__)

REFLEXIVES = {"se", "me", "te", "nous", "vous"}
NEG = "NEG"
FINAL = "sem"  # predicate the semantic rule file uses for final literals


class SemanticError(RuntimeError):
    pass


def ref_temp(x) -> Fn:
    return Fn("ref_temp", (x,))


def build_intermediate(relations: Iterable[Relation]) -> frozenset:
    """Verb-centred literals: transitive (default blocked by negation),
    intransitive, negated and prepositional forms."""
    rels = frozenset(relations)
    out: set[Lit] = set()
    by_name: dict[str, list[Relation]] = {}
    for r in rels:
        by_name.setdefault(r.name, []).append(r)
    for s in by_name.get("sujet", ()):
        verb, subj = s.args
        negated = Relation("qualif_v", (verb, NEG)) in rels
        objects = [o.args[1] for o in by_name.get("objet", ()) if o.args[0] == verb]
        real = [z for z in objects if z not in REFLEXIVES]
        for z in objects:
            # reflexive clitics mark the pronominal form and survive negation
            if z in REFLEXIVES or not negated:
                out.add(Lit("vrai", (combine(verb, z), subj, ref_temp(verb))))
        if negated:
            out.add(Lit("vrai", (verb, subj, ref_temp(verb)), neg=True))
        elif not real:
            out.add(Lit("vrai", (verb, subj, ref_temp(verb))))
        for c in by_name.get("compl_v", ()):
            prep, v, noun = c.args
            if v == verb:
                out.add(Lit("vrai", (combine(prep, verb, noun), subj, ref_temp(prep))))
    return frozenset(out)


def _constants(t, acc: set) -> None:
    if isinstance(t, str):
        acc.add(t)
    elif isinstance(t, Fn):
        for a in t.args:
            _constants(a, acc)


def semantic_facts(
    intermediate: Iterable[Lit],
    lexicon: Lexicon,
    relations: Iterable[Relation] = (),
    voice: Iterable[VoiceFact] = (),
) -> list[Lit]:
    """Everything the semantic rules may match: intermediate literals, the
    normalized relations, voice, prepositions and lexicon facts per mention."""
    facts: set[Lit] = set(intermediate)
    names: set[str] = set()
    for lit in facts:
        for a in lit.args:
            _constants(a, names)
    for r in relations:
        facts.add(Lit(r.name, tuple(r.args)))
        names.update(a for a in r.args if isinstance(a, str))
        if r.name in ("compl_v", "compl_n"):
            facts.add(Lit("prep", (r.args[0],)))
    for v in voice:
        facts.add(Lit("voie", (v.verb, v.voice)))
    for name in names:
        lemma = base_lemma(name)
        if lemma in lexicon.val_sem:
            facts.add(Lit("val_sem", (name, lexicon.val_sem[lemma])))
        for t in lexicon.types(lemma) | lexicon.types(name):
            facts.add(Lit("type", (name, t)))
    return sorted(facts)


@dataclass
class SemanticResult:
    literals: frozenset
    temporal: tuple
    models: int


def build_semantic(
    intermediate: Iterable[Lit],
    lexicon: Lexicon,
    rules: Iterable[Rule],
    relations: Iterable[Relation] = (),
    voice: Iterable[VoiceFact] = (),
) -> SemanticResult:
    """Run the semantic rule file; ``sem`` literals become the final ``vrai``
    literals and ``prec``/``simul`` the temporal relations."""
    facts = semantic_facts(intermediate, lexicon, relations, voice)
    models = stable_models(ground(list(rules), facts))
    if not models:
        raise SemanticError("semantic rules have no stable model on these facts")
    if len(models) > 1:
        log.warning("semantic rules have %d stable models; keeping their intersection", len(models))
    model = frozenset.intersection(*models)
    literals = frozenset(Lit("vrai", l.args, l.neg) for l in model if l.pred == FINAL)
    temporal = sorted(
        (TemporalRelation(l.pred, *l.args) for l in model if l.pred in ("prec", "simul") and not l.neg),
        key=str,
    )
    return SemanticResult(literals, tuple(temporal), len(models))
