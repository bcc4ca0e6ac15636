"""Rewrites named surface relations into canonical form before semantic construction."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .lexicon import Lexicon, Token
from .parser import Relation

AUTHOR = "Auteur"
FIRST_PERSON = {"je", "j'", "me", "m'", "moi"}
THIRD_PERSON = {"il", "elle", "lui", "le", "la", "son", "sa", "ses", "leur", "leurs", "ils", "elles", "les", "eux"}
PLURAL_PRONOUNS = {"ses", "leurs", "ils", "elles", "les", "eux"}
# entity types a third-person pronoun may pick up
REFERENT_TYPES = {"agent"}
ELISIONS = {"s'": "se", "j'": "je", "m'": "me", "t'": "te", "l'": "le", "n'": "ne", "d'": "de", "qu'": "que"}


class NormalizationError(RuntimeError):
    pass


def base_lemma(name: str) -> str:
    """Strip the occurrence number from a display name (``être2`` -> ``être``)."""
    m = re.fullmatch(r"(.*?\D)\d+", name)
    return m.group(1) if m else name


def is_symbol(name: str) -> bool:
    return len(name) == 1 and name.isalpha() and name.isupper()


def is_entity(name: str) -> bool:
    return name == AUTHOR or is_symbol(name)


@dataclass(frozen=True)
class CorefFact:
    left: str
    right: str
    surface: str | None = None

    def __str__(self) -> str:
        return f"même_ref({self.surface or self.left}, {self.right})"


class Corefs(frozenset):
    """Set of :class:`CorefFact`; ``unresolved`` lists pronouns left without antecedent."""

    unresolved: tuple[str, ...] = ()

    def __new__(cls, facts: Iterable[CorefFact] = (), unresolved: Iterable[str] = ()):
        obj = super().__new__(cls, facts)
        obj.unresolved = tuple(unresolved)
        return obj


@dataclass(frozen=True)
class VoiceFact:
    verb: str
    voice: str = "passive"

    def __str__(self) -> str:
        return f"voie({self.verb}, {self.voice})"


def _mentioned(relations: Iterable[Relation]) -> set[str]:
    return {a for r in relations for a in r.args}


def _plural(tok: Token) -> bool:
    return tok.surface.lower() != tok.lemma.lower() and tok.surface[-1:].lower() in ("s", "x")


def resolve_anaphora(relations: Iterable[Relation], mentions: Mapping[str, Token], lexicon: Lexicon) -> Corefs:
    """First-person forms go to ``Auteur``; third-person pronouns and possessives to
    the nearest preceding noun mention with the same number and a referent type."""
    relations = list(relations)
    used = _mentioned(relations)
    facts, unresolved = set(), []
    nouns = sorted(
        (tok.position, name, tok)
        for name, tok in mentions.items()
        if name in used and tok.tag.startswith("NOM")
    )
    for name, tok in sorted(mentions.items(), key=lambda kv: kv[1].position):
        if name not in used or tok.tag.endswith("REFL"):
            continue
        lemma = tok.lemma.lower()
        if lemma in FIRST_PERSON or tok.surface.lower() in FIRST_PERSON:
            facts.add(CorefFact(name, AUTHOR, tok.surface))
            continue
        if lemma not in THIRD_PERSON:
            continue
        plural = lemma in PLURAL_PRONOUNS
        best = None
        for pos, nname, ntok in nouns:
            if pos >= tok.position:
                break
            if _plural(ntok) != plural:
                continue
            if not lexicon.types(ntok.lemma) & REFERENT_TYPES:
                continue
            best = nname
        if best is None:
            unresolved.append(name)
        else:
            facts.add(CorefFact(name, best, tok.surface))
    return Corefs(facts, unresolved)


def coref_classes(corefs: Iterable[CorefFact]) -> dict[str, frozenset[str]]:
    """Equivalence classes of the symmetric, transitive closure of ``même_ref``."""
    parent: dict[str, str] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in corefs:
        a, b = find(c.left), find(c.right)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[str, set[str]] = {}
    for x in list(parent):
        groups.setdefault(find(x), set()).add(x)
    return {x: frozenset(groups[find(x)]) for x in parent}


def _subst(relations: Iterable[Relation], mapping: Mapping[str, str]) -> frozenset:
    return frozenset(Relation(r.name, tuple(mapping.get(a, a) for a in r.args)) for r in relations)


def _subst_corefs(corefs: Iterable[CorefFact], mapping: Mapping[str, str]) -> Corefs:
    out = {CorefFact(mapping.get(c.left, c.left), mapping.get(c.right, c.right), c.surface) for c in corefs}
    return Corefs({c for c in out if c.left != c.right}, getattr(corefs, "unresolved", ()))


def substitute_entities(relations: Iterable[Relation], corefs: Iterable[CorefFact]) -> frozenset:
    """Replace every mention coreferent with an entity constant by that constant."""
    mapping = {}
    for name, cls in coref_classes(corefs).items():
        ents = sorted(x for x in cls if is_entity(x))
        if ents and not is_entity(name):
            mapping[name] = ents[0]
    return _subst(relations, mapping)


def apply_metonymy(relations: Iterable[Relation], corefs: Iterable[CorefFact], lexicon: Lexicon) -> frozenset:
    """Driver/vehicle metonymy, applied to a fixpoint.

    ``qualif_n(x, Y)`` with ``x`` of type agent and ``Y`` a vehicle symbol:
    ``x`` and every mention coreferent with ``x`` become ``Y``; the
    qualification itself is consumed.
    """
    rels = frozenset(relations)
    corefs = Corefs(corefs)
    limit = len(rels) + 1
    for _ in range(limit):
        trigger = next(
            (
                r
                for r in sorted(rels, key=str)
                if r.name == "qualif_n"
                and is_symbol(r.args[1])
                and not is_entity(r.args[0])
                and lexicon.has_type(base_lemma(r.args[0]), "agent")
            ),
            None,
        )
        if trigger is None:
            return rels
        x, y = trigger.args
        group = coref_classes(corefs).get(x, frozenset({x}))
        mapping = {z: y for z in group | {x} if not is_entity(z)}
        rels = _subst(rels - {trigger}, mapping)
        corefs = _subst_corefs(corefs, mapping)
    raise NormalizationError("metonymy substitution did not reach a fixpoint")


def fold_mwe_relations(relations: Iterable[Relation], lexicon: Lexicon) -> frozenset:
    """Two-word expressions parsed as ``qualif_n(head, modifier)`` become one entity."""
    rels = frozenset(relations)
    pairs = {words: ent for words, ent in lexicon.mwes if len(words) == 2}
    for r in sorted(rels, key=str):
        if r.name != "qualif_n" or r not in rels:
            continue
        ent = pairs.get((base_lemma(r.args[0]), base_lemma(r.args[1])))
        if ent is not None:
            rels = _subst(rels - {r}, {r.args[0]: ent})
    return rels


def fold_support_verbs(relations: Iterable[Relation], lexicon: Lexicon) -> frozenset:
    """Replace each support verb by the verb it supports, chains resolved innermost first."""
    rels = frozenset(relations)
    step = {
        r.args[0]: r.args[1]
        for r in rels
        if r.name == "support" and base_lemma(r.args[0]) in lexicon.supports
    }
    if not step:
        return rels

    def final(s):
        seen = {s}
        while s in step:
            s = step[s]
            if s in seen:
                raise NormalizationError(f"cyclic support chain through {s!r}")
            seen.add(s)
        return s

    mapping = {s: final(s) for s in step}
    kept = {r for r in rels if not (r.name == "support" and r.args[0] in step)}
    out = set(_subst(kept, mapping))
    for s, v in mapping.items():
        for feat in sorted(lexicon.support_features.get(base_lemma(s), ())):
            out.add(Relation("qualif_v", (v, feat)))
    return frozenset(out)


def detect_passive(relations: Iterable[Relation]) -> frozenset:
    """``support(êtreN, V)`` plus either a ``par`` complement or a past participle feature on êtreN."""
    rels = frozenset(relations)
    out = set()
    for r in rels:
        if r.name != "support" or base_lemma(r.args[0]) != "être":
            continue
        aux, verb = r.args
        agentive = any(
            q.name == "compl_v" and base_lemma(q.args[0]) == "par" and q.args[1] == aux for q in rels
        )
        participle = Relation("qualif_v", (aux, "PASSÉ")) in rels
        if agentive or participle:
            out.add(VoiceFact(verb))
    return frozenset(out)


def unify_entities(relations: Iterable[Relation]) -> frozenset:
    """Numbered mentions of one entity symbol (``B1``, ``B2``) denote the same referent."""
    names = _mentioned(relations)
    return _subst(relations, {n: base_lemma(n) for n in names if isinstance(n, str) and is_entity(base_lemma(n))})


def expand_elisions(relations: Iterable[Relation]) -> frozenset:
    return _subst(relations, ELISIONS)


@dataclass
class Normalized:
    relations: frozenset
    corefs: Corefs
    voice: frozenset = field(default_factory=frozenset)


def normalize(relations: Iterable[Relation], mentions: Mapping[str, Token], lexicon: Lexicon) -> Normalized:
    """anaphora -> entity unification and substitution -> metonymy -> expressions -> passive -> supports -> elisions.

    Passive detection needs the ``support(être, V)`` relations, so it runs
    just before support folding.
    """
    rels = frozenset(relations)
    corefs = resolve_anaphora(rels, mentions, lexicon)
    rels = unify_entities(rels)
    rels = substitute_entities(rels, corefs)
    rels = apply_metonymy(rels, corefs, lexicon)
    rels = fold_mwe_relations(rels, lexicon)
    voice = detect_passive(rels)
    rels = fold_support_verbs(rels, lexicon)
    rels = expand_elisions(rels)
    return Normalized(rels, corefs, voice)
