"""Command line: ``diracgb analyze MODEL`` and ``diracgb list``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .analysis import STAGES, Inconsistent, IterationLimit, Options, analyze
from .groebner import DEFAULT_BUDGET, ResourceLimitExceeded
from .ingest import ParseError, load_model
from .report import build_report, to_json, to_text

EXIT_OK, EXIT_INCONSISTENT, EXIT_PARSE, EXIT_RESOURCE = 0, 1, 2, 3


def corpus_dir():
    return Path(str(resources.files("diracgb") / "models"))


def corpus_list():
    """(name, path, first comment line) for each bundled model, sorted by name."""
    out = []
    for p in sorted(corpus_dir().glob("*.model")):
        desc = ""
        for line in p.read_text(encoding="utf-8").splitlines():
            if line.startswith("#"):
                desc = line.lstrip("# ").strip()
                break
        out.append((p.stem, p, desc))
    return out


def resolve_model(arg):
    p = Path(arg)
    if p.exists():
        return p
    bundled = corpus_dir() / f"{arg}.model"
    if bundled.exists():
        return bundled
    bundled = corpus_dir() / p.name
    if bundled.exists():
        return bundled
    return p


def _parser():
    ap = argparse.ArgumentParser(prog="diracgb",
                                 description="Dirac constraint analysis with Gröbner bases")
    sub = ap.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="analyze a model file (or a bundled model name)")
    a.add_argument("model")
    a.add_argument("--stage", choices=STAGES, default="all")
    a.add_argument("--weak-equality", choices=("ideal", "radical"), default="ideal")
    a.add_argument("--order", choices=("degrevlex", "lex"), default="degrevlex")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--output", metavar="PATH")
    a.add_argument("--max-iterations", type=int, default=32, metavar="N")
    a.add_argument("--term-budget", type=int, default=None, metavar="N")
    a.add_argument("--timings", action="store_true",
                   help="include per-stage wall-clock times (makes output nondeterministic)")
    sub.add_parser("list", help="list bundled models")
    return ap


def _emit(rep, args):
    text = to_json(rep) if args.format == "json" else to_text(rep)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cli_analyze(args):
    path = resolve_model(args.model)
    try:
        model = load_model(path, inner=args.order)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"error: cannot read {path}: {e.strerror}", file=sys.stderr)
        return EXIT_PARSE
    budget = DEFAULT_BUDGET
    if args.term_budget is not None:
        budget = replace(budget, max_terms=args.term_budget)
    opts = Options(order=args.order, weak_equality=args.weak_equality,
                   max_iterations=args.max_iterations, budget=budget)
    try:
        an = analyze(model, stage=args.stage, options=opts)
    except Inconsistent as e:
        an = e.args[0]
        _emit(build_report(an, args.stage, args.timings, status="inconsistent"), args)
        last = an.constraints[-1]
        print(f"inconsistent: {last.label} = {last.polynomial} makes the constraint ideal trivial",
              file=sys.stderr)
        return EXIT_INCONSISTENT
    except (ResourceLimitExceeded, IterationLimit) as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    _emit(build_report(an, args.stage, args.timings), args)
    return EXIT_OK


def cli_list(args):
    for name, _, desc in corpus_list():
        print(f"{name}\t{desc}" if desc else name)
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "list":
        return cli_list(args)
    return cli_analyze(args)


if __name__ == "__main__":
    sys.exit(main())
