"""Command line entry point: ``qfisher compute | verify | catalog``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalog
from .errors import QFisherError
from .report import EXIT_INPUT_ERROR, exit_code, load_spec, render, run, verify_suite


def _compute(args) -> int:
    try:
        spec = load_spec(args.specfile)
        report = run(spec, mutate=args.mutate)
    except QFisherError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    text = render(report)
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    summary = report["summary"]
    print(f"{summary['status']}: {summary['pass']} pass, {summary['warn']} warn, "
          f"{summary['fail']} fail, {summary['n/a']} n/a", file=sys.stderr)
    return exit_code(report)


def _verify(args) -> int:
    try:
        summary = verify_suite(args.seed, args.count, mutate=args.mutate)
    except QFisherError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    print(json.dumps(summary, indent=2))
    return exit_code(summary)


def _catalog(args) -> int:
    for name, entry in catalog.CATALOG.items():
        print(f"{name:18s} {entry.kind:12s} {entry.summary}")
        if entry.defaults:
            print(f"{'':18s} {'':12s} defaults: {json.dumps(entry.defaults)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfisher",
        description="Classical, Fubini-Study and SLD quantum Fisher information with identity checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="evaluate one model spec file and write a JSON report")
    compute.add_argument("specfile", type=Path)
    compute.add_argument("--out", type=Path, default=None, help="report path (default: stdout)")
    compute.add_argument("--mutate", choices=["omega-sign"], default=None, help=argparse.SUPPRESS)
    compute.set_defaults(func=_compute)

    verify = sub.add_parser("verify", help="run all checks over random models")
    verify.add_argument("--seed", type=int, required=True)
    verify.add_argument("--count", type=int, required=True)
    verify.add_argument("--mutate", choices=["omega-sign"], default=None,
                        help="inject a known defect (negative control)")
    verify.set_defaults(func=_verify)

    cat = sub.add_parser("catalog", help="built-in models")
    cat_sub = cat.add_subparsers(dest="catalog_command", required=True)
    cat_list = cat_sub.add_parser("list", help="list catalog models and their parameters")
    cat_list.set_defaults(func=_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
