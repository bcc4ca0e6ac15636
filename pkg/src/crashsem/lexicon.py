"""Tagged report files, the domain lexicon, and multiword-expression folding."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence


class IngestError(ValueError):
    pass


class EmptyReportError(IngestError):
    pass


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    tag: str
    index: int
    sentence: int = 1

    def __post_init__(self):
        if not self.lemma or not self.tag:
            raise IngestError(f"token {self.surface!r} needs a lemma and a tag")
        if self.index < 1:
            raise IngestError("token index starts at 1")

    @property
    def position(self) -> tuple[int, int]:
        return (self.sentence, self.index)

    def __str__(self) -> str:
        return f"{self.lemma}@{self.sentence}.{self.index}"


@dataclass(frozen=True)
class TaggedReport:
    id: str
    sentences: tuple[tuple[Token, ...], ...]

    def __post_init__(self):
        if not self.sentences or any(not s for s in self.sentences):
            raise EmptyReportError(f"report {self.id!r} has no sentences or an empty sentence")

    @property
    def tokens(self) -> list[Token]:
        return [t for s in self.sentences for t in s]


@dataclass
class Lexicon:
    val_sem: dict[str, str] = field(default_factory=dict)
    type_of: dict[str, set[str]] = field(default_factory=dict)
    supports: set[str] = field(default_factory=set)
    support_features: dict[str, set[str]] = field(default_factory=dict)
    mwes: list[tuple[tuple[str, ...], str]] = field(default_factory=list)

    def types(self, lemma: str) -> set[str]:
        return self.type_of.get(lemma, set())

    def has_type(self, lemma: str, label: str) -> bool:
        return label in self.type_of.get(lemma, ())


def parse_tagged(text: str, report_id: str = "report") -> TaggedReport:
    sentences: list[tuple[Token, ...]] = []
    current: list[Token] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r")
        if line.startswith("#"):
            continue
        if not line.strip():
            if current:
                sentences.append(tuple(current))
                current = []
            continue
        cols = line.split("\t")
        if len(cols) != 3 or not all(c.strip() for c in cols):
            raise IngestError(f"line {lineno}: expected surface<TAB>lemma<TAB>tag, got {line!r}")
        surface, lemma, tag = cols
        current.append(Token(surface, lemma, tag, len(current) + 1, len(sentences) + 1))
    if current:
        sentences.append(tuple(current))
    if not sentences:
        raise EmptyReportError(f"report {report_id!r} is empty")
    return TaggedReport(report_id, tuple(sentences))


def load_tagged_report(path: str | Path) -> TaggedReport:
    path = Path(path)
    return parse_tagged(path.read_text(encoding="utf-8"), path.stem)


def serialize_report(report: TaggedReport) -> str:
    blocks = ["".join(f"{t.surface}\t{t.lemma}\t{t.tag}\n" for t in sent) for sent in report.sentences]
    return "\n".join(blocks)


def parse_lexicon(text: str, source: str = "<lexicon>") -> Lexicon:
    lex = Lexicon()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *rest = line.split()
        if kind == "val_sem" and len(rest) == 2:
            lemma, value = rest
            old = lex.val_sem.get(lemma)
            if old is not None and old != value:
                raise IngestError(f"{source}:{lineno}: conflicting val_sem for {lemma!r}: {old!r} vs {value!r}")
            lex.val_sem[lemma] = value
        elif kind == "type" and len(rest) == 2:
            lex.type_of.setdefault(rest[0], set()).add(rest[1])
        elif kind == "support" and rest:
            lex.supports.add(rest[0])
            if rest[1:]:
                lex.support_features.setdefault(rest[0], set()).update(rest[1:])
        elif kind == "mwe" and "->" in rest:
            k = rest.index("->")
            words, entity = rest[:k], rest[k + 1:]
            if not words or len(entity) != 1:
                raise IngestError(f"{source}:{lineno}: expected 'mwe <lemma>+ -> <entity>'")
            lex.mwes.append((tuple(words), entity[0]))
        else:
            raise IngestError(f"{source}:{lineno}: unrecognised lexicon entry {line!r}")
    return lex


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    return parse_lexicon(path.read_text(encoding="utf-8"), str(path))


def fold_mwes(sentence: Sequence[Token], lexicon: Lexicon) -> list[Token]:
    """Replace leftmost-longest, non-overlapping MWE lemma sequences by one token."""
    patterns = sorted(lexicon.mwes, key=lambda m: -len(m[0]))
    out: list[Token] = []
    lemmas = [t.lemma for t in sentence]
    i = 0
    while i < len(sentence):
        for words, entity in patterns:
            n = len(words)
            if tuple(lemmas[i:i + n]) == words:
                first = sentence[i]
                surface = " ".join(t.surface for t in sentence[i:i + n])
                out.append(Token(surface, entity, first.tag, 1, first.sentence))
                i += n
                break
        else:
            out.append(sentence[i])
            i += 1
    return [replace(t, index=k) for k, t in enumerate(out, 1)]
