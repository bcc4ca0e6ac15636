from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .parser import DEFAULT_CAP
from .pipeline import FORMATS, TRACE_LEVELS, RunConfig, analyze, data_path


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crashsem", description="Find the violated norm behind a road-accident report.")
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="analyze one tagged report or a corpus directory")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--report", type=Path)
    src.add_argument("--corpus", type=Path)
    a.add_argument("--grammar", type=Path, default=data_path("grammar.txt"))
    a.add_argument("--lexicon", type=Path, default=data_path("lexicon.txt"))
    a.add_argument("--semrules", type=Path, default=data_path("semantic.kb"))
    a.add_argument("--kb", type=Path, default=data_path("norms.kb"))
    a.add_argument("--ontology", type=Path, default=data_path("ontology.txt"))
    a.add_argument("--trace", choices=TRACE_LEVELS, default="stages")
    a.add_argument("--format", choices=FORMATS, default="text")
    a.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum analyses per sentence")
    a.add_argument("--headroom", type=int, default=1, help="extra time steps beyond the last instant")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    config = RunConfig(
        report=args.report,
        corpus=args.corpus,
        grammar=args.grammar,
        lexicon=args.lexicon,
        semrules=args.semrules,
        kb=args.kb,
        ontology=args.ontology,
        trace=args.trace,
        format=args.format,
        cap=args.cap,
        headroom=args.headroom,
    )
    try:
        config.validate()
    except ValueError as e:
        print(f"crashsem: configuration error: {e}", file=sys.stderr)
        return 2
    try:
        status, _, text = analyze(config)
    except Exception as e:  # resource files failed to load
        print(f"crashsem: configuration error: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
