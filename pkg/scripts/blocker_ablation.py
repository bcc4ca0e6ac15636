"""Drop each blocker of the stop-to-avoid norm in turn and report which duties and witnesses change."""

import argparse
import itertools
from dataclasses import replace
from pathlib import Path

from crashsem.lexicon import load_tagged_report
from crashsem.pipeline import Resources, RunConfig, analyze_report, data_path


def verdicts(res: Resources, paths) -> dict:
    out = {}
    for p in paths:
        r = analyze_report(load_tagged_report(p), res)
        duties = sorted(str(l) for l in r.chosen.model if l.pred == "doit" and isinstance(l.args[0], str)) if r.chosen else []
        out[p.stem] = {"duties": duties, "witnesses": [str(w) for w in r.witnesses]}
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", type=Path, default=data_path("corpus"))
    ap.add_argument("--rule", default="stop_to_avoid")
    ap.add_argument("--pairs", action="store_true", help="drop blockers two at a time")
    args = ap.parse_args()
    res = Resources.load(RunConfig(corpus=args.corpus))
    paths = sorted(args.corpus.glob("*.tsv"))
    base = verdicts(res, paths)
    idx = next(i for i, r in enumerate(res.kb.rules) if r.provenance and r.provenance.endswith(":" + args.rule))
    rule = res.kb.rules[idx]
    print(f"baseline: {base}")
    drops = itertools.combinations(range(len(rule.blockers)), 2 if args.pairs else 1)
    for drop in drops:
        rules = list(res.kb.rules)
        rules[idx] = replace(rule, blockers=tuple(b for k, b in enumerate(rule.blockers) if k not in drop))
        kb = replace(res.kb, program=replace(res.kb.program, rules=rules))
        changed = {r: v for r, v in verdicts(replace(res, kb=kb), paths).items() if v != base[r]}
        names = ", ".join(str(rule.blockers[k]) for k in drop)
        print(f"without [{names}]: {changed or 'no change'}")


if __name__ == "__main__":
    main()
