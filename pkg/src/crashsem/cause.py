"""Anomaly witnesses in a stable model and their textual explanation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .logic import Fn, Lit, fmt_term
from .norms import ANOMALY


class WitnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnomalyWitness:
    agent: str
    duty: object
    duty_time: int
    violation: object
    violation_time: int
    primary: bool = False

    def as_dict(self) -> dict:
        return {
            "agent": self.agent,
            "duty": fmt_term(self.duty),
            "duty_time": self.duty_time,
            "violation": fmt_term(self.violation),
            "violation_time": self.violation_time,
            "primary": self.primary,
        }

    def __str__(self) -> str:
        return f"({self.agent}, {fmt_term(self.duty)}, {self.duty_time}, {fmt_term(self.violation)}, {self.violation_time})"


def detect_anomalies(model: Iterable[Lit]) -> list[AnomalyWitness]:
    """Every ``doit(E,A,T) & en_mesure(E,A,T) & vrai(F,A,T+1) & incompatible(E,F)``.

    Sorted by (time, agent); the earliest is flagged primary.
    """
    model = frozenset(model)
    capable = {l.args for l in model if l.pred == "en_mesure" and not l.neg}
    incompatible = {l.args for l in model if l.pred == "incompatible" and not l.neg}
    states: dict[tuple, list] = {}
    for l in model:
        if l.pred == "vrai" and not l.neg and len(l.args) == 3:
            states.setdefault((l.args[1], l.args[2]), []).append(l.args[0])
    found = set()
    for l in model:
        if l.pred != "doit" or l.neg or len(l.args) != 3:
            continue
        effect, agent, t = l.args
        if (effect, agent, t) not in capable or not isinstance(t, int):
            continue
        for later in states.get((agent, t + 1), ()):
            if (effect, later) in incompatible:
                found.add((t, str(agent), effect, later))
    out = [
        AnomalyWitness(agent, effect, t, later, t + 1)
        for t, agent, effect, later in sorted(found, key=lambda w: (w[0], w[1], fmt_term(w[2]), fmt_term(w[3])))
    ]
    if out:
        out[0] = AnomalyWitness(out[0].agent, out[0].duty, out[0].duty_time, out[0].violation, out[0].violation_time, True)
    if (ANOMALY in model) != bool(out):
        raise WitnessError("Vraie_An and the anomaly witnesses disagree")
    return out


# infinitive used after "le devoir de", and the state sentence for non(E)
_FR_EFFECTS = {
    "arrêter": ("s'arrêter", "n'était pas à l'arrêt"),
    "rouler_lentement": ("rouler lentement", "ne roulait pas lentement"),
    "reculer": ("reculer", "ne reculait pas"),
    "démarrer": ("démarrer", "n'avait pas démarré"),
    "contrôle": ("garder le contrôle", "n'avait pas le contrôle"),
}
_EN_EFFECTS = {
    "arrêter": ("stop", "it was not stopped"),
    "rouler_lentement": ("drive slowly", "it was not driving slowly"),
    "reculer": ("reverse", "it was not reversing"),
    "démarrer": ("move off", "it had not moved off"),
    "contrôle": ("keep control", "it was not in control"),
}


def _violation_text(violation, table: dict, locale: str) -> str:
    if isinstance(violation, Fn) and violation.name == "non" and violation.args:
        inner = violation.args[0]
        if isinstance(inner, str) and inner in table:
            return table[inner][1]
    name = fmt_term(violation)
    return f"{name} était vérifié" if locale == "fr" else f"{name} held"


def _vehicle(agent: str, locale: str) -> str:
    return f"Le véhicule {agent}" if locale == "fr" else f"Vehicle {agent}"


def render_explanation(witness: AnomalyWitness, locale: str = "fr") -> str:
    if locale == "fr":
        duty = _FR_EFFECTS.get(witness.duty, (fmt_term(witness.duty),))[0] if isinstance(witness.duty, str) else fmt_term(witness.duty)
        return (
            f"{_vehicle(witness.agent, 'fr')} avait à l'instant {witness.duty_time} le devoir de {duty} "
            f"afin d'éviter le choc, mais il n'a pas respecté son devoir car à l'instant "
            f"{witness.violation_time}, il {_violation_text(witness.violation, _FR_EFFECTS, 'fr')}."
        )
    if locale == "en":
        duty = _EN_EFFECTS.get(witness.duty, (fmt_term(witness.duty),))[0] if isinstance(witness.duty, str) else fmt_term(witness.duty)
        return (
            f"{_vehicle(witness.agent, 'en')} had at instant {witness.duty_time} the duty to {duty} "
            f"in order to avoid the collision, but did not fulfil it: at instant "
            f"{witness.violation_time}, {_violation_text(witness.violation, _EN_EFFECTS, 'en')}."
        )
    raise ValueError(f"unsupported locale {locale!r}")
