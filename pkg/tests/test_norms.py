import pytest

from crashsem.logic import Fn, KBError, Lit, parse_literal, parse_program
from crashsem.norms import (
    ANOMALY,
    Ontology,
    duty_and_capacity,
    is_kernel_literal,
    kernel_closure,
    parse_ontology,
    reason,
    validate_norm_kb,
)


def L(s):
    return parse_literal(s)


# A hits B at 3: obstacles at 2, so both stop-to-avoid duties sit at T=2 and
# the T-1 blockers land on instant 1, inside the time range.
HIT = [L("vrai(combine(heurter, B), A, 3)")]
DUTY_A = L("doit(arrêter, A, 2)")


def model(kb, extra=()):
    (m,) = reason(HIT + [L(s) for s in extra], kb)
    return m


def test_unblocked_duty(kb):
    m = model(kb)
    assert DUTY_A in m
    assert L("doit(combine(éviter, B), A, 2)") in m
    assert L("vrai(non(arrêter), A, 3)") in m


@pytest.mark.parametrize(
    "fact",
    [
        "vrai(combine(suiv, A), B, 2)",
        "vrai(arrêter, A, 2)",
        "doit(rouler_lentement, A, 2)",
        "doit(non(reculer), A, 1)",
        "doit(non(démarrer), A, 1)",
        "-prévisible(combine(obstacle, B), A, 2)",
    ],
)
def test_each_blocker_suppresses_duty(kb, fact):
    m = model(kb, [fact])
    assert DUTY_A not in m
    # the obstacle duty itself is strict and survives
    assert L("doit(combine(éviter, B), A, 2)") in m


def test_capacity_from_available_action(kb):
    m = model(kb)
    assert L("disponible(freiner, arrêter, A, 2)") in m
    assert L("en_mesure(arrêter, A, 2)") in m


def test_disruption_blocks_availability(kb):
    m = model(kb, ["vrai(combine(cause_perturbation_anormale, verglas), A, 2)"])
    assert L("perturbe(A, 2)") in m
    assert L("disponible(freiner, arrêter, A, 2)") not in m
    assert L("en_mesure(arrêter, A, 2)") not in m
    assert L("en_mesure(arrêter, A, 1)") in m
    # the duty holds but cannot be met, so it is no true anomaly
    assert DUTY_A in m and ANOMALY not in m


def test_loss_of_control_blocks_availability(kb):
    m = model(kb, ["-vrai(contrôle, A, 2)"])
    assert L("en_mesure(arrêter, A, 2)") not in m
    assert ANOMALY not in m


def test_anomaly_on_hit(kb):
    m = model(kb)
    assert ANOMALY in m


def test_staged_reasoning_agrees(kb):
    kernel = kernel_closure(HIT, kb)
    assert L("-vrai(arrêter, A, 3)") in kernel
    assert not any(l.pred in ("doit", "en_mesure") for l in kernel)
    full = duty_and_capacity(kernel, kb)
    assert {DUTY_A, ANOMALY} <= full
    assert full == model(kb)


# --- red-light report -----------------------------------------------------------------


def test_report1_membership(result1):
    m = result1.chosen.model
    for s in [
        "-vrai(arrêter, B, 2)",
        "vrai(combine(suiv, Auteur), B, 1)",
        "doit(arrêter, B, 1)",
        "disponible(freiner, arrêter, B, 1)",
        "en_mesure(arrêter, B, 1)",
    ]:
        assert L(s) in m, s
    assert L("doit(arrêter, Auteur, 1)") not in m
    assert ANOMALY in m


def test_kernel_claim_on_corpus(resources):
    from crashsem.lexicon import load_tagged_report
    from crashsem.pipeline import analyze_report

    from conftest import CORPUS

    for path in sorted(CORPUS.glob("*.tsv")):
        r = analyze_report(load_tagged_report(path), resources)
        for w in r.witnesses:
            consumed = [
                Lit("doit", (w.duty, w.agent, w.duty_time)),
                Lit("en_mesure", (w.duty, w.agent, w.duty_time)),
                Lit("vrai", (w.violation, w.agent, w.violation_time)),
            ]
            assert all(is_kernel_literal(l) for l in consumed)
            assert all(l in r.chosen.model for l in consumed)


# --- knowledge base and ontology -------------------------------------------------


def test_every_rule_has_provenance(kb):
    assert all(r.provenance for r in kb.rules)
    published = {r.provenance.split(":")[1] for r in kb.rules if r.provenance.startswith("published")}
    assert published == {
        "hitter_not_stopped", "follower_from_rear_impact", "stop_to_avoid",
        "action_available", "capacity", "anomaly", "avoid_obstacles",
    }


def test_stages(kb):
    assert {r.stage for r in kb.rules} == {"kernel", "duty"}


def test_incompatible_symmetric_and_non(kb):
    pairs = kb.ontology.incompatible
    assert all((b, a) in pairs for a, b in pairs)
    for e in kb.ontology.effects:
        assert (e, Fn("non", (e,))) in pairs
    assert ("arrêter", "démarrer") in pairs and ("démarrer", "arrêter") in pairs


def test_ontology_errors():
    with pytest.raises(KBError, match="undeclared action"):
        parse_ontology("effet e\nraison_pot a e\n")
    with pytest.raises(KBError, match="undeclared effect"):
        parse_ontology("action a\nraison_pot a e\n")
    with pytest.raises(KBError, match="undeclared effect"):
        parse_ontology("effet e\nincompatible e f\n")
    with pytest.raises(KBError, match="unrecognised"):
        parse_ontology("effect e\n")


def test_kb_validation():
    onto = Ontology(effects={"arrêter"})
    ok = parse_program("@published r vrai(x, A, T) -> doit(arrêter, A, T) .")
    validate_norm_kb(ok, onto)
    with pytest.raises(KBError, match="undeclared effect"):
        validate_norm_kb(parse_program("@published r vrai(x, A, T) -> doit(voler, A, T) ."), onto)
    with pytest.raises(KBError, match="undeclared predicate"):
        validate_norm_kb(parse_program("@published r vrai(x, A, T) : p(A) [mystère(A)] ."), onto)
    with pytest.warns(UserWarning, match="provenance"):
        validate_norm_kb(parse_program("vrai(x, A, T) -> p(A) ."), onto)


def test_kernel_literal_classifier():
    assert is_kernel_literal(L("vrai(arrêter, B, 1)"))
    assert is_kernel_literal(L("vrai(non(reculer), B, 1)"))
    assert is_kernel_literal(L("vrai(combine(cause_perturbation_anormale, x), B, 1)"))
    assert is_kernel_literal(L("doit(arrêter, B, 1)"))
    assert not is_kernel_literal(L("vrai(feu_rouge, B, 1)"))
