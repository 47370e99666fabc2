"""Command-line entry point: ``bemlab [--config PATH] [--scenario NAME ...] --out DIR``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from .config import ConfigParseError, parse_config
from .errors import ConfigurationError
from .runner import FORMATS, run

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def builtin_text():
    return resources.files("bemlab").joinpath("data", "builtin.cfg").read_text(encoding="utf-8")


def builtin_scenarios():
    return parse_config(builtin_text())


def build_parser():
    p = argparse.ArgumentParser(prog="bemlab", description="Run weighted-curvature scenario checks.")
    p.add_argument("--config", metavar="PATH", help="scenario file (default: the built-in library)")
    p.add_argument("--scenario", metavar="NAME", action="append", default=[],
                   help="run only this scenario; repeatable")
    p.add_argument("--out", metavar="DIR", default="bemlab-out", help="output directory")
    p.add_argument("--format", choices=FORMATS, default="csv", help="table format")
    p.add_argument("--tol", type=float, metavar="X", help="override every check tolerance")
    p.add_argument("--list", action="store_true", help="list scenario names and exit")
    p.add_argument("--threads", type=int, default=1, metavar="N", help="scenarios run concurrently")
    return p


def exit_code(reports):
    if any(r.error_kind == "runtime" for r in reports):
        return EXIT_RUNTIME
    if any(r.error_kind == "configuration" for r in reports):
        return EXIT_CONFIG
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECKS


def _print_report(r, out):
    status = "PASS" if r.passed else ("ERROR" if r.error else "FAIL")
    print(f"{status:5s} {r.scenario} ({r.wall_time:.2f}s)", file=out)
    for c in r.checks:
        print(f"      {'ok ' if c.passed else 'BAD'} {c.name}: observed={c.observed!r} expected={c.expected!r}",
              file=out)
    if r.error:
        print(f"      {r.error_kind} error: {r.error}", file=out)


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                scenarios = parse_config(fh.read())
        else:
            scenarios = builtin_scenarios()
    except ConfigParseError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.list:
        for s in scenarios:
            print(f"{s.name}\t{s.kind}", file=out)
        return EXIT_OK

    if args.scenario:
        known = {s.name: s for s in scenarios}
        missing = [n for n in args.scenario if n not in known]
        if missing:
            print(f"unknown scenario(s): {', '.join(missing)}; valid: {', '.join(known)}", file=sys.stderr)
            return EXIT_CONFIG
        scenarios = [known[n] for n in args.scenario]
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        reports = run(scenarios, args.out, args.format, tol=args.tol, threads=args.threads)
    except OSError as exc:
        print(f"output directory not writable: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for r in reports:
        _print_report(r, out)
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
