"""Per-report parse ambiguity: analyses, distinct relation sets and viable candidates."""

import argparse
from pathlib import Path

from crashsem.lexicon import load_tagged_report
from crashsem.parser import count_analyses, distinct_relation_sets, parse
from crashsem.pipeline import Resources, RunConfig, analyze_report, data_path


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", type=Path, default=data_path("corpus"))
    args = ap.parse_args()
    res = Resources.load(RunConfig(corpus=args.corpus))
    print(f"{'report':<22}{'sent':>5}{'analyses':>10}{'sets':>6}{'viable':>8}{'models':>8}")
    for path in sorted(args.corpus.glob("*.tsv")):
        report = load_tagged_report(path)
        n_an = sum(count_analyses(s, res.grammar) for s in report.sentences)
        n_sets = sum(len(distinct_relation_sets(parse(s, res.grammar))) for s in report.sentences)
        r = analyze_report(report, res)
        print(f"{report.id:<22}{len(report.sentences):>5}{n_an:>10}{n_sets:>6}{r.viable:>8}{r.model_count:>8}")


if __name__ == "__main__":
    main()
