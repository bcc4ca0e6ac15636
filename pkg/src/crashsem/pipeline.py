"""End-to-end analysis of tagged reports, with per-stage traces."""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

from .cause import AnomalyWitness, detect_anomalies, render_explanation
from .engine import ground, stable_models
from .lexicon import Lexicon, TaggedReport, load_lexicon, load_tagged_report
from .logic import Program, fmt_term, parse_kb
from .normalize import normalize
from .norms import ANOMALY, NormKB, is_kernel_literal, load_norm_kb, program_facts, reasoning_domain
from .parser import DEFAULT_CAP, Grammar, group_by_relations, load_grammar, name_relations, parse
from .semantics import build_intermediate, build_semantic
from .temporal import build_temporal_graph, level_and_instantiate

STAGES = ("ingest", "parse", "dedup", "normalize", "semantic", "temporal", "ground", "solve", "detect")
TRACE_LEVELS = ("quiet", "stages", "full")
FORMATS = ("text", "structured")
MAX_CANDIDATES = 512


def data_path(name: str) -> Path:
    return Path(str(resources.files("crashsem") / "data" / name))


@dataclass
class RunConfig:
    report: Path | None = None
    corpus: Path | None = None
    grammar: Path = field(default_factory=lambda: data_path("grammar.txt"))
    lexicon: Path = field(default_factory=lambda: data_path("lexicon.txt"))
    semrules: Path = field(default_factory=lambda: data_path("semantic.kb"))
    kb: Path = field(default_factory=lambda: data_path("norms.kb"))
    ontology: Path = field(default_factory=lambda: data_path("ontology.txt"))
    trace: str = "stages"
    format: str = "text"
    cap: int = DEFAULT_CAP
    headroom: int = 1

    def validate(self) -> None:
        if (self.report is None) == (self.corpus is None):
            raise ValueError("exactly one of report or corpus is required")
        if self.trace not in TRACE_LEVELS:
            raise ValueError(f"trace must be one of {TRACE_LEVELS}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.headroom < 0:
            raise ValueError("headroom must be >= 0")
        for name in ("grammar", "lexicon", "semrules", "kb", "ontology"):
            p = Path(getattr(self, name))
            if not p.is_file():
                raise ValueError(f"{name} file not readable: {p}")
        if self.report is not None and not Path(self.report).is_file():
            raise ValueError(f"report file not readable: {self.report}")
        if self.corpus is not None and not Path(self.corpus).is_dir():
            raise ValueError(f"corpus directory not readable: {self.corpus}")

    def report_paths(self) -> list[Path]:
        if self.report is not None:
            return [Path(self.report)]
        return sorted(p for p in Path(self.corpus).iterdir() if p.is_file() and p.suffix in (".tsv", ".txt"))


@dataclass
class Resources:
    grammar: Grammar
    lexicon: Lexicon
    semrules: Program
    kb: NormKB

    @classmethod
    def load(cls, config: RunConfig) -> "Resources":
        return cls(
            load_grammar(config.grammar),
            load_lexicon(config.lexicon),
            parse_kb(config.semrules),
            load_norm_kb(config.kb, config.ontology),
        )


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"{stage}: {message}")


@dataclass
class StageRecord:
    stage: str
    inputs: int
    outputs: int
    items: list[str] = field(default_factory=list)
    elapsed: float = 0.0


@dataclass
class StageTrace:
    records: list[StageRecord] = field(default_factory=list)

    def add(self, stage: str, inputs: int, items, elapsed: float) -> None:
        items = sorted(str(i) for i in items)
        self.records.append(StageRecord(stage, inputs, len(items), items, elapsed))


@dataclass
class Candidate:
    relations: frozenset
    trace: StageTrace
    final: frozenset = frozenset()
    levels: dict = field(default_factory=dict)
    models: list = field(default_factory=list)
    witnesses: list[AnomalyWitness] = field(default_factory=list)
    error: StageError | None = None

    @property
    def model(self) -> frozenset:
        return self.models[0] if self.models else frozenset()

    @property
    def kernel(self) -> list:
        return sorted(l for l in self.model if is_kernel_literal(l))

    @property
    def viable(self) -> bool:
        return self.error is None and bool(self.models) and (ANOMALY in self.model or bool(self.kernel))

    def score(self) -> tuple:
        return (ANOMALY in self.model, len(self.final), len(self.kernel))


@dataclass
class ReportResult:
    id: str
    ok: bool
    trace: StageTrace
    candidates: int = 0
    viable: int = 0
    chosen: Candidate | None = None
    error: StageError | None = None

    @property
    def witnesses(self) -> list[AnomalyWitness]:
        return self.chosen.witnesses if self.chosen else []

    @property
    def model_count(self) -> int:
        return len(self.chosen.models) if self.chosen else 0

    def explanation(self, locale: str = "fr") -> str | None:
        prim = [w for w in self.witnesses if w.primary]
        return render_explanation(prim[0], locale) if prim else None


def _timed(fn: Callable, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def _run_candidate(relations: frozenset, mentions: dict, res: Resources, headroom: int, trace: StageTrace) -> Candidate:
    cand = Candidate(relations, trace)
    stage = "normalize"
    try:
        norm, dt = _timed(normalize, relations, mentions, res.lexicon)
        trace.add("normalize", len(relations), list(norm.relations) + list(norm.corefs) + list(norm.voice), dt)

        stage = "semantic"
        t0 = time.perf_counter()
        inter = build_intermediate(norm.relations)
        sem = build_semantic(inter, res.lexicon, res.semrules.rules, norm.relations, norm.voice)
        trace.add("semantic", len(norm.relations), list(sem.literals) + list(sem.temporal), time.perf_counter() - t0)

        stage = "temporal"
        t0 = time.perf_counter()
        graph = build_temporal_graph(sem.temporal)
        final, levels = level_and_instantiate(graph, sem.literals)
        cand.final = final
        cand.levels = levels.levels
        trace.add("temporal", len(sem.literals), final, time.perf_counter() - t0)

        stage = "ground"
        t0 = time.perf_counter()
        facts = program_facts(final, res.kb, headroom)
        prog = ground(res.kb.rules, facts, reasoning_domain(final, res.kb.ontology, headroom))
        trace.add("ground", len(facts), [str(r) for r in prog.rules], time.perf_counter() - t0)

        stage = "solve"
        cand.models, dt = _timed(stable_models, prog)
        trace.add("solve", len(prog), cand.model, dt)
        if not cand.models:
            raise StageError("solve", "no stable model")

        stage = "detect"
        cand.witnesses, dt = _timed(detect_anomalies, cand.model)
        trace.add("detect", len(cand.model), cand.witnesses, dt)
    except StageError as e:
        cand.error = e
    except Exception as e:  # any stage failure makes this candidate non-viable
        cand.error = StageError(stage, str(e))
    return cand


def analyze_report(report: TaggedReport, res: Resources, cap: int = DEFAULT_CAP, headroom: int = 1) -> ReportResult:
    base = StageTrace()
    base.add("ingest", len(report.tokens), [t.surface for t in report.tokens], 0.0)
    result = ReportResult(report.id, False, base)
    try:
        t0 = time.perf_counter()
        per_sentence = []
        for sent in report.sentences:
            analyses = parse(sent, res.grammar, cap)
            if not analyses:
                raise StageError("parse", "no analysis")
            per_sentence.append(analyses)
        n_analyses = sum(len(a) for a in per_sentence)
        base.add("parse", len(report.tokens), [f"s{i}:{len(a)}" for i, a in enumerate(per_sentence, 1)], time.perf_counter() - t0)

        t0 = time.perf_counter()
        options = [list(group_by_relations(a)) for a in per_sentence]
        combos = []
        for combo in itertools.islice(itertools.product(*options), MAX_CANDIDATES):
            rels = frozenset().union(*combo)
            named, mentions = name_relations(rels)
            combos.append((sorted(map(str, named)), named, mentions))
        combos.sort(key=lambda c: c[0])
        base.add("dedup", n_analyses, [f"candidate {i}: {len(c[1])} relations" for i, c in enumerate(combos, 1)], time.perf_counter() - t0)
    except StageError as e:
        result.error = e
        return result
    except Exception as e:
        result.error = StageError("parse", str(e))
        return result

    result.candidates = len(combos)
    best: Candidate | None = None
    last_error = None
    for _, named, mentions in combos:
        trace = StageTrace(list(base.records))
        cand = _run_candidate(named, mentions, res, headroom, trace)
        if not cand.viable:
            last_error = cand.error or last_error
            continue
        result.viable += 1
        if best is None or cand.score() > best.score():
            best = cand
    if best is None:
        result.error = last_error or StageError("solve", "no viable relation set")
        return result
    result.ok = True
    result.chosen = best
    result.trace = best.trace
    return result


# --- output -----------------------------------------------------------------


def _fmt_levels(levels: dict) -> dict:
    return {str(k): v for k, v in sorted(levels.items(), key=lambda kv: str(kv[0]))}


def result_dict(r: ReportResult, level: str = "stages") -> dict:
    out: dict = {"report": r.id, "ok": r.ok}
    if r.error:
        out["error"] = {"stage": r.error.stage, "message": str(r.error)}
    out["model_count"] = r.model_count
    out["anomaly"] = bool(r.chosen and ANOMALY in r.chosen.model)
    out["witnesses"] = [w.as_dict() for w in r.witnesses]
    out["explanation"] = {"fr": r.explanation("fr"), "en": r.explanation("en")}
    if level == "quiet":
        return out
    out["candidates"] = {"total": r.candidates, "viable": r.viable}
    stages = []
    for rec in r.trace.records:
        entry = {"stage": rec.stage, "inputs": rec.inputs, "outputs": rec.outputs}
        if level == "full":
            entry["items"] = rec.items
        stages.append(entry)
    out["stages"] = stages
    if r.chosen:
        out["final_literals"] = sorted(map(str, r.chosen.final))
        out["time_levels"] = _fmt_levels(r.chosen.levels)
    return out


def emit_structured(results: list[ReportResult], level: str = "stages") -> str:
    doc = {
        "reports": [result_dict(r, level) for r in results],
        "summary": {"reports": len(results), "failed": sum(not r.ok for r in results)},
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def emit_trace(trace: StageTrace, level: str = "stages") -> str:
    if level == "quiet":
        return ""
    lines = []
    for rec in trace.records:
        lines.append(f"  {rec.stage:<10} in={rec.inputs:<5} out={rec.outputs:<5} {rec.elapsed * 1000:8.1f} ms")
        if level == "full":
            lines.extend(f"      {item}" for item in rec.items)
    return "\n".join(lines) + "\n"


def emit_text(results: list[ReportResult], level: str = "stages") -> str:
    chunks = []
    for r in results:
        head = f"[{r.id}] "
        if not r.ok:
            chunks.append(head + f"FAILED at {r.error}\n" + emit_trace(r.trace, level))
            continue
        verdict = r.explanation("fr") or "aucune anomalie détectée"
        body = emit_trace(r.trace, level)
        if level != "quiet":
            body += f"  candidates={r.candidates} viable={r.viable} stable_models={r.model_count}\n"
            for w in r.witnesses:
                body += f"  witness {w}{' (primary)' if w.primary else ''}\n"
        chunks.append(head + verdict + "\n" + body)
    return "".join(chunks)


def analyze(config: RunConfig) -> tuple[int, list[ReportResult], str]:
    """Run every report; exit status 0 iff each yields at least one stable model."""
    config.validate()
    res = Resources.load(config)
    results = []
    for path in config.report_paths():
        try:
            report = load_tagged_report(path)
        except Exception as e:
            trace = StageTrace()
            results.append(ReportResult(path.stem, False, trace, error=StageError("ingest", str(e))))
            continue
        results.append(analyze_report(report, res, config.cap, config.headroom))
    text = emit_structured(results, config.trace) if config.format == "structured" else emit_text(results, config.trace)
    status = 0 if all(r.ok and r.model_count >= 1 for r in results) else 1
    return status, results, text
