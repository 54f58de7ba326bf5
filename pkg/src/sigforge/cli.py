"""Command-line entry point.

Commands: tsc, bound, extend, chain, compare, report. Exit codes: 0 on
success, 2 on validation failure (bad files, bad arguments, caps), 3 on
internal-consistency failure (a guaranteed equality broke, which means the
implementation is wrong, not the input).
"""

from __future__ import annotations

import argparse
import sys

from .bounds import Underloaded, binary_tsc_bound, load_bound_table, welch_bound
from .harness import (
    METHODS,
    InternalConsistencyError,
    emit_report,
    extend_once,
    one_shot_experiment,
    upscale_chain,
)
from .linalg import EigenFailure, SingularMatrix
from .sigcore import SetFormatError, hadamard_set, load_set, save_set, tsc
from .sphere import CapExceeded, EmptySphere


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigforge",
        description="Grow binary signature sets one signature at a time with "
        "guaranteed-minimal total squared correlation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tsc", help="total squared correlation of a set file")
    p.add_argument("set_file")

    p = sub.add_parser("bound", help="TSC lower bounds for given K and L")
    p.add_argument("--k", type=int, required=True, help="number of signatures")
    p.add_argument("--l", dest="length", type=int, required=True, help="signature length")
    p.add_argument("--table", help="JSON case table for the binary bound")

    p = sub.add_parser("extend", help="add one signature to a set")
    p.add_argument("set_file")
    p.add_argument("--method", choices=METHODS, default="sd")
    p.add_argument("--audit", action="store_true", default=None,
                   help="force the sphere-vs-exhaustive equality check")
    p.add_argument("--save-set", metavar="PATH", help="write the extended set here")

    p = sub.add_parser("chain", help="extend one-by-one up to a target K")
    p.add_argument("set_file", nargs="?", help="initial set file")
    p.add_argument("--hadamard", type=int, metavar="L",
                   help="start from the L x L Hadamard set instead of a file")
    p.add_argument("--to", dest="target", type=int, required=True, metavar="K")
    p.add_argument("--method", choices=METHODS, default="sd")
    p.add_argument("--audit", action="store_true", default=None)
    p.add_argument("--save-set", metavar="PATH", help="write the final set here")

    p = sub.add_parser("compare", help="run all methods on each set file")
    p.add_argument("set_files", nargs="*")

    p = sub.add_parser("report", help="run a chain and write a report file")
    p.add_argument("set_file", nargs="?", help="initial set file")
    p.add_argument("--hadamard", type=int, metavar="L",
                   help="Hadamard start (default 16 when no file is given)")
    p.add_argument("--to", dest="target", type=int, default=32, metavar="K")
    p.add_argument("--method", choices=METHODS, default="sd")
    p.add_argument("--audit", action="store_true", default=None)
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), required=True)
    p.add_argument("--out", required=True, metavar="PATH")

    return parser


def _cmd_tsc(args) -> int:
    loaded = load_set(args.set_file)
    print(f"k {loaded.k}")
    print(f"length {loaded.length}")
    print(f"tsc {tsc(loaded)}")
    print(f"welch {welch_bound(loaded.k, loaded.length).value}")
    return 0


def _cmd_bound(args) -> int:
    table = load_bound_table(args.table) if args.table else None
    print(f"welch {welch_bound(args.k, args.length).value}")
    if args.k < args.length:
        print("binary n/a (requires K >= L)")
    else:
        bound = binary_tsc_bound(args.k, args.length, table)
        print(f"binary {bound.value} ({bound.kind})")
    return 0


def _print_record(record, agreement) -> None:
    print(f"method {record.method}")
    print(f"k_before {record.k_before}")
    print(f"k_after {record.k_after}")
    print(f"length {record.length}")
    print(f"metric {record.metric}")
    print(f"tsc_before {record.tsc_before}")
    print(f"tsc_after {record.tsc_after}")
    print(f"radius_c {record.radius_c!r}")
    print(f"lambda_min {record.lambda_min!r}")
    print(f"nodes_visited {record.nodes_visited}")
    print(f"candidates_enumerated {record.candidates_enumerated}")
    print(f"fp_bound {'n/a' if record.fp_bound is None else repr(record.fp_bound)}")
    print(f"jitter_applied {'true' if record.jitter_applied else 'false'}")
    print(f"welch_after {record.welch_after.value}")
    print(f"binary_bound_after {record.binary_bound_after.value} "
          f"({record.binary_bound_after.kind})")
    print(f"audit {'pass' if agreement else 'skipped' if agreement is None else 'fail'}")


def _cmd_extend(args) -> int:
    loaded = load_set(args.set_file)
    extended, record, agreement = extend_once(loaded, args.method, audit=args.audit)
    _print_record(record, agreement)
    if args.save_set:
        save_set(extended, args.save_set)
        print(f"saved {args.save_set}")
    return 0


def _resolve_start(args, default_hadamard: int | None):
    if args.set_file is not None and args.hadamard is not None:
        raise ValueError("give either a set file or --hadamard, not both")
    if args.set_file is not None:
        return load_set(args.set_file)
    length = args.hadamard if args.hadamard is not None else default_hadamard
    if length is None:
        raise ValueError("give a set file or --hadamard L")
    return hadamard_set(length)


def _cmd_chain(args) -> int:
    start = _resolve_start(args, default_hadamard=None)
    report = upscale_chain(start, args.target, args.method, audit=args.audit)
    for step, (record, agreement) in enumerate(zip(report.records, report.audit), start=1):
        audit_note = "pass" if agreement else "skipped" if agreement is None else "fail"
        print(f"step {step}  k_after {record.k_after}  metric {record.metric}  "
              f"tsc_after {record.tsc_after}  audit {audit_note}")
    final = report.final_set
    print(f"final k {final.k}")
    print(f"final tsc {report.records[-1].tsc_after}")
    if args.save_set:
        save_set(final, args.save_set)
        print(f"saved {args.save_set}")
    return 0


def _cmd_compare(args) -> int:
    report = one_shot_experiment(args.set_files)
    sys.stdout.write(emit_report(report, "csv").decode("utf-8"))
    failed = sum(1 for entry in report.entries if entry.error is not None)
    return 2 if failed else 0


def _cmd_report(args) -> int:
    start = _resolve_start(args, default_hadamard=16)
    report = upscale_chain(start, args.target, args.method, audit=args.audit)
    payload = emit_report(report, args.fmt)
    with open(args.out, "wb") as handle:
        handle.write(payload)
    print(f"wrote {args.out}")
    return 0


_HANDLERS = {
    "tsc": _cmd_tsc,
    "bound": _cmd_bound,
    "extend": _cmd_extend,
    "chain": _cmd_chain,
    "compare": _cmd_compare,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (SetFormatError, Underloaded, CapExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InternalConsistencyError, EmptySphere, SingularMatrix, EigenFailure) as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
