"""Command-line interface.

Exit codes: 0 success, 1 diagnostics from `check`, 2 evaluation error,
3 bridge/plugin failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from relog import api
from relog.errors import BridgeIoError, RelogError
from relog.ffi.bridge_client import DEFAULT_TIMEOUT_MS
from relog.runtime.database import ExecutionConfig
from relog.runtime.facts import encode_value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relog",
                                     description="probabilistic relational programs")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse, apply attributes, and type-check")
    check.add_argument("file")
    check.add_argument("--plugin", action="append", default=[], metavar="CMD")

    run = sub.add_parser("run", help="evaluate a program and print query results")
    run.add_argument("file")
    run.add_argument("--provenance", choices=["unit", "minmaxprob", "topkproofs"],
                     default="topkproofs")
    run.add_argument("--top-k", type=int, default=3, metavar="K")
    run.add_argument("--query", action="append", default=[], metavar="NAME")
    run.add_argument("--facts", action="append", default=[], metavar="PATH")
    run.add_argument("--plugin", action="append", default=[], metavar="CMD")
    run.add_argument("--output", choices=["json", "csv"], default="json")
    run.add_argument("--foreign-errors", choices=["discard", "abort"], default="discard")
    run.add_argument("--emit", choices=["plan"], default=None)
    run.add_argument("--iter-cap", type=int, default=10_000, metavar="N")
    return parser


def _plugin_timeout_ms() -> int:
    raw = os.environ.get("RELOG_PLUGIN_TIMEOUT_MS")
    if raw is None:
        return DEFAULT_TIMEOUT_MS
    try:
        return max(1, int(raw))
    except ValueError:
        return DEFAULT_TIMEOUT_MS


def cmd_check(args) -> int:
    registry = None
    try:
        base_dir = os.path.dirname(os.path.abspath(args.file))
        registry = api.build_registry(base_dir, args.plugin, _plugin_timeout_ms())
        api.compile_program(path=args.file, registry=registry)
    except BridgeIoError as exc:
        print(exc.render(), file=sys.stderr)
        return 3
    except RelogError as exc:
        location = exc.span.location() if exc.span is not None else args.file
        print(f"{location}: error: {exc.message}", file=sys.stderr)
        return 1
    finally:
        if registry is not None:
            api.close_registry(registry)
    return 0


def cmd_run(args) -> int:
    if args.top_k < 1:
        print("error: --top-k must be >= 1", file=sys.stderr)
        return 2
    registry = None
    try:
        base_dir = os.path.dirname(os.path.abspath(args.file))
        registry = api.build_registry(base_dir, args.plugin, _plugin_timeout_ms())
        compiled = api.compile_program(path=args.file, registry=registry)
        if args.emit == "plan":
            print(json.dumps(compiled.plan.to_json(), indent=2, sort_keys=True))
            return 0
        try:
            config = ExecutionConfig(iteration_cap=args.iter_cap,
                                     foreign_error_policy=args.foreign_errors)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        evaluator, results = api.run_program(
            compiled, provenance=args.provenance, top_k=args.top_k,
            queries=args.query or None, fact_files=args.facts, config=config)
        _render(results, args.output, evaluator.db.store)
        return 0
    except BridgeIoError as exc:
        print(exc.render(), file=sys.stderr)
        return 3
    except RelogError as exc:
        print(exc.render(), file=sys.stderr)
        return 2
    finally:
        if registry is not None:
            api.close_registry(registry)


def _render(results, output: str, store) -> None:
    if output == "json":
        for name, facts in results.items():
            doc = {"query": name,
                   "facts": [{"prob": prob,
                              "tuple": [encode_value(v, store) for v in values]}
                             for prob, values in facts]}
            print(json.dumps(doc, separators=(", ", ": ")))
        return
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["query", "prob", "tuple"])
    for name, facts in results.items():
        for prob, values in facts:
            encoded = json.dumps([encode_value(v, store) for v in values])
            writer.writerow([name, "" if prob is None else repr(prob), encoded])
    sys.stdout.write(buffer.getvalue())


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "check":
        return cmd_check(args)
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
