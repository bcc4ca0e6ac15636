import pytest
from hypothesis import given, strategies as st

from crashsem.lexicon import (
    EmptyReportError,
    IngestError,
    Lexicon,
    Token,
    fold_mwes,
    load_tagged_report,
    parse_lexicon,
    parse_tagged,
    serialize_report,
)

from conftest import CORPUS, REPORT1


def toks(*lemmas):
    return [Token(l, l, "NOM", i) for i, l in enumerate(lemmas, 1)]


def test_report1_tokens(report1):
    assert report1.id == "r01_feu_rouge"
    assert len(report1.sentences) == 1
    assert len(report1.tokens) == 30
    first = report1.tokens[0]
    assert (first.surface, first.lemma, first.tag, first.index) == ("Étant", "être", "VER:ppre", 1)


def test_indices_strictly_increasing(report1):
    for sent in report1.sentences:
        assert [t.index for t in sent] == list(range(1, len(sent) + 1))


def test_comments_and_sentence_breaks():
    rep = parse_tagged("# header\na\ta\tX\n\n\nb\tb\tY\nc\tc\tZ\n")
    assert [[t.lemma for t in s] for s in rep.sentences] == [["a"], ["b", "c"]]
    assert rep.sentences[1][1].position == (2, 2)


def test_malformed_line_reports_line_number():
    with pytest.raises(IngestError, match="line 2"):
        parse_tagged("a\ta\tX\nbroken line\n")


def test_missing_tag_rejected():
    with pytest.raises(IngestError):
        parse_tagged("a\ta\t\n")


def test_empty_report():
    with pytest.raises(EmptyReportError):
        parse_tagged("# nothing here\n\n")


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.tsv")))
def test_corpus_round_trip(path):
    text = path.read_text(encoding="utf-8")
    assert serialize_report(load_tagged_report(path)) == text


def test_lexicon_entries(lexicon):
    assert lexicon.val_sem["percuter"] == "heurter"
    assert lexicon.has_type("B", "véhicule")
    assert "être" in lexicon.supports
    assert lexicon.support_features["oublier"] == {"NEG"}
    assert (("feu", "rouge"), "feu_rouge") in lexicon.mwes


def test_val_sem_functional():
    with pytest.raises(IngestError, match="conflicting val_sem"):
        parse_lexicon("val_sem a x\nval_sem a y\n")
    assert parse_lexicon("val_sem a x\nval_sem a x\n").val_sem == {"a": "x"}


def test_bad_lexicon_entry():
    with pytest.raises(IngestError, match=":2:"):
        parse_lexicon("type a b\nfrobnicate a\n")


def test_mwe_entity_has_no_whitespace(lexicon):
    assert all(" " not in e for _, e in lexicon.mwes)


def test_fold_feu_rouge(lexicon):
    out = fold_mwes(toks("feu", "rouge"), lexicon)
    assert [t.lemma for t in out] == ["feu_rouge"]
    assert out[0].surface == "feu rouge"


def test_fold_no_match(lexicon):
    assert [t.lemma for t in fold_mwes(toks("feu", "vert"), lexicon)] == ["feu", "vert"]


def test_fold_every_occurrence(lexicon):
    out = fold_mwes(toks("feu", "rouge", "feu", "rouge"), lexicon)
    assert [t.lemma for t in out] == ["feu_rouge", "feu_rouge"]
    assert [t.index for t in out] == [1, 2]


def test_fold_leftmost_longest():
    lex = Lexicon(mwes=[(("a", "b"), "ab"), (("a", "b", "c"), "abc"), (("b", "c"), "bc")])
    assert [t.lemma for t in fold_mwes(toks("a", "b", "c", "b", "c"), lex)] == ["abc", "bc"]


def _scan_oracle(lemmas, mwes):
    # independent route: scan positions, try every pattern, keep the longest
    out, i = [], 0
    while i < len(lemmas):
        best = None
        for words, ent in mwes:
            if lemmas[i:i + len(words)] == list(words) and (best is None or len(words) > len(best[0])):
                best = (words, ent)
        if best:
            out.append(best[1])
            i += len(best[0])
        else:
            out.append(lemmas[i])
            i += 1
    return out


WORDS = st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=12)
MWES = st.lists(
    st.tuples(st.lists(st.sampled_from(["a", "b", "c"]), min_size=2, max_size=3).map(tuple), st.sampled_from(["X", "Y", "Z"])),
    max_size=3,
    unique_by=lambda m: m[0],
)


@given(WORDS, MWES)
def test_fold_matches_scan_oracle(lemmas, mwes):
    lex = Lexicon(mwes=mwes)
    assert [t.lemma for t in fold_mwes(toks(*lemmas), lex)] == _scan_oracle(lemmas, mwes)


@given(WORDS, MWES)
def test_fold_idempotent_on_entities(lemmas, mwes):
    # entities are fresh names, so a second pass finds nothing new
    lex = Lexicon(mwes=mwes)
    once = fold_mwes(toks(*lemmas), lex)
    assert fold_mwes(once, lex) == once


@given(WORDS, MWES)
def test_fold_count(lemmas, mwes):
    lex = Lexicon(mwes=mwes)
    out = fold_mwes(toks(*lemmas), lex)
    folded = [t for t in out if " " in t.surface]
    assert len(out) == len(lemmas) - sum(len(t.surface.split()) - 1 for t in folded)
    assert [t.index for t in out] == list(range(1, len(out) + 1))


def test_report_path_stem():
    assert load_tagged_report(REPORT1).id == REPORT1.stem
