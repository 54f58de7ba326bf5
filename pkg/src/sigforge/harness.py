"""Experiment orchestration: single extensions with full diagnostics,
consecutive upscaling chains, four-way method comparisons, and deterministic
JSON/CSV report serialization.

Method tags: "sd" (sphere search, optimal), "ml" (exhaustive scan, optimal),
"quant" (sign-quantized minimum eigenvector, no search), "descent" (bit-flip
descent from the quantized point, a labeled stand-in baseline; it serializes
as "descent(stand-in)" so nobody mistakes it for an optimal method or for
any published heuristic).

Audit mode runs the sphere search and the exhaustive scan side by side and
demands identical metrics; a mismatch is an internal-consistency failure,
never a tolerable discrepancy. Audit defaults on for L <= 16, where the
scan costs nothing.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass

import numpy as np

from .bounds import (
    BoundOverflow,
    BoundTable,
    BoundValue,
    Underloaded,
    binary_tsc_bound,
    fp_operation_bound,
    welch_bound,
)
from .linalg import cholesky, min_eigenpair, quantize_sign
from .sigcore import (
    SetFormatError,
    Signature,
    SignatureSet,
    correlation_matrix,
    extend_set,
    load_set,
    quadratic_metric,
    tsc,
    tsc_increment,
)
from .sphere import (
    DEFAULT_ML_CAP,
    extend_optimal,
    local_descent_baseline,
    ml_exhaustive,
    sphere_search,
)

__all__ = [
    "ExtensionRecord",
    "ChainReport",
    "CompareRow",
    "CompareEntry",
    "CompareReport",
    "InternalConsistencyError",
    "METHODS",
    "AUDIT_AUTO_MAX_L",
    "ML_CAP_ENV",
    "REPORT_SCHEMA",
    "resolve_ml_cap",
    "extend_once",
    "upscale_chain",
    "compare_methods",
    "one_shot_experiment",
    "emit_report",
]

METHODS = ("sd", "ml", "quant", "descent")
_METHOD_LABELS = {
    "sd": "sd",
    "ml": "ml",
    "quant": "quant",
    "descent": "descent(stand-in)",
}

AUDIT_AUTO_MAX_L = 16
ML_CAP_ENV = "SIGFORGE_ML_CAP"
REPORT_SCHEMA = "sigforge.report/1"


class InternalConsistencyError(RuntimeError):
    """A guaranteed-equal quantity came out unequal; the build is wrong."""


def resolve_ml_cap(explicit: int | None = None) -> int:
    """Exhaustive-scan cap: explicit argument, else the SIGFORGE_ML_CAP
    environment variable, else the built-in default."""
    if explicit is not None:
        cap = explicit
    else:
        raw = os.environ.get(ML_CAP_ENV)
        if raw is None:
            return DEFAULT_ML_CAP
        try:
            cap = int(raw)
        except ValueError:
            raise ValueError(f"{ML_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"exhaustive cap must be positive, got {cap}")
    return cap


@dataclass(frozen=True)
class ExtensionRecord:
    """Everything observable about one K -> K+1 extension."""

    k_before: int
    length: int
    tsc_before: int
    tsc_after: int
    method: str
    metric: int
    radius_c: float
    lambda_min: float
    nodes_visited: int
    candidates_enumerated: int
    fp_bound: float | None
    jitter_applied: bool
    welch_after: BoundValue
    binary_bound_after: BoundValue

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        expected = tsc_increment(self.tsc_before, self.metric, self.length)
        if self.tsc_after != expected:
            raise InternalConsistencyError(
                f"tsc_after {self.tsc_after} breaks the recursion "
                f"(expected {expected})"
            )
        if self.tsc_after < self.welch_after.value:
            raise InternalConsistencyError(
                f"tsc_after {self.tsc_after} below the Welch bound "
                f"{self.welch_after.value}"
            )

    @property
    def k_after(self) -> int:
        return self.k_before + 1


@dataclass(frozen=True)
class ChainReport:
    """Consecutive one-by-one extensions from a fixed initial set.

    ``audit`` holds one entry per step: True/False for the sphere-vs-scan
    agreement when audited, None when the step ran unaudited.
    """

    method: str
    initial_k: int
    initial_length: int
    records: tuple
    audit: tuple
    final_set: SignatureSet

    def __post_init__(self):
        if len(self.audit) != len(self.records):
            raise ValueError("audit flags must align with records")
        previous = None
        for record in self.records:
            if previous is not None and record.tsc_before != previous.tsc_after:
                raise InternalConsistencyError(
                    f"chain break at K={record.k_before}: tsc_before "
                    f"{record.tsc_before} != previous tsc_after {previous.tsc_after}"
                )
            previous = record


@dataclass(frozen=True)
class CompareRow:
    """One K -> K+1 comparison of all four methods on the same set."""

    k_after: int
    length: int
    tsc_before: int
    tsc_quant: int
    tsc_descent: int
    tsc_sd: int
    tsc_ml: int


@dataclass(frozen=True)
class CompareEntry:
    """One input file's outcome in a batch comparison; either a row with
    bound gaps or a per-file error message."""

    path: str
    error: str | None = None
    row: CompareRow | None = None
    bound: BoundValue | None = None
    gap_quant: int | None = None
    gap_descent: int | None = None
    gap_sd: int | None = None
    gap_ml: int | None = None


@dataclass(frozen=True)
class CompareReport:
    entries: tuple


def _bound_after(k_after: int, length: int, table: BoundTable | None) -> BoundValue:
    # Binary bounds are defined for K >= L only; a still-underloaded set
    # gets the plain Welch bound instead.
    if k_after >= length:
        return binary_tsc_bound(k_after, length, table)
    return welch_bound(k_after, length)


def extend_once(
    signature_set: SignatureSet,
    method: str = "sd",
    *,
    audit: bool | None = None,
    ml_cap: int | None = None,
    table: BoundTable | None = None,
):
    """Extend a set by one signature with the chosen method.

    Returns (extended set, ExtensionRecord, agreement flag). The radius,
    minimum eigenvalue, operation bound, and jitter flag are properties of
    the set's autocorrelation matrix and are reported for every method.

    ``audit`` None means automatic: on for L <= 16 when the exhaustive scan
    fits the cap, off otherwise. When auditing, the sphere and the scan
    must return the same metric; anything else raises
    InternalConsistencyError.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    cap = resolve_ml_cap(ml_cap)
    length = signature_set.length

    matrix = correlation_matrix(signature_set)
    pair = min_eigenpair(matrix)
    quantized = quantize_sign(pair.vector)
    quant_metric = quadratic_metric(matrix, quantized)
    radius = float(quant_metric)

    factor = cholesky(matrix)
    diag = np.diag(factor.entries)
    try:
        fp_bound = fp_operation_bound(length, radius, 1.0 / float((diag * diag).min()))
    except BoundOverflow:
        fp_bound = None

    sd_result = None
    ml_result = None
    if method == "sd":
        best, detail = extend_optimal(signature_set)
        metric = detail.best_metric
        nodes = detail.nodes_visited
        enumerated = detail.candidates_enumerated
        sd_result = metric
    elif method == "ml":
        result = ml_exhaustive(matrix, cap)
        best = result.best
        metric = result.best_metric
        nodes = result.nodes_visited
        enumerated = result.candidates_enumerated
        ml_result = metric
    elif method == "quant":
        best = quantized
        metric = quant_metric
        nodes = 1
        enumerated = 1
    else:
        result = local_descent_baseline(matrix, quantized)
        best = result.best
        metric = result.best_metric
        nodes = result.nodes_visited
        enumerated = result.candidates_enumerated

    if audit is None:
        audit = length <= AUDIT_AUTO_MAX_L and length <= cap
    agreement: bool | None = None
    if audit:
        if sd_result is None:
            sd_result = sphere_search(matrix, radius).best_metric
        if ml_result is None:
            ml_result = ml_exhaustive(matrix, cap).best_metric
        agreement = sd_result == ml_result
        if not agreement:
            raise InternalConsistencyError(
                f"audit failed at K={signature_set.k}, L={length}: "
                f"sphere metric {sd_result} != exhaustive metric {ml_result}"
            )

    extended = extend_set(signature_set, best)
    tsc_before = tsc(signature_set)
    record = ExtensionRecord(
        k_before=signature_set.k,
        length=length,
        tsc_before=tsc_before,
        tsc_after=tsc(extended),
        method=method,
        metric=metric,
        radius_c=radius,
        lambda_min=pair.value,
        nodes_visited=nodes,
        candidates_enumerated=enumerated,
        fp_bound=fp_bound,
        jitter_applied=factor.jitter > 0.0,
        welch_after=welch_bound(signature_set.k + 1, length),
        binary_bound_after=_bound_after(signature_set.k + 1, length, table),
    )
    return extended, record, agreement


def upscale_chain(
    initial: SignatureSet,
    target_k: int,
    method: str = "sd",
    *,
    audit: bool | None = None,
    ml_cap: int | None = None,
    table: BoundTable | None = None,
) -> ChainReport:
    """Extend one signature at a time until the set holds ``target_k``."""
    if target_k <= initial.k:
        raise ValueError(f"target K={target_k} must exceed the current K={initial.k}")
    current = initial
    records = []
    flags = []
    while current.k < target_k:
        current, record, agreement = extend_once(
            current, method, audit=audit, ml_cap=ml_cap, table=table
        )
        records.append(record)
        flags.append(agreement)
    return ChainReport(
        method=method,
        initial_k=initial.k,
        initial_length=initial.length,
        records=tuple(records),
        audit=tuple(flags),
        final_set=current,
    )


def compare_methods(signature_set: SignatureSet, *, ml_cap: int | None = None) -> CompareRow:
    """All four methods on the same autocorrelation matrix, one row out.

    The sphere and exhaustive metrics must agree; the quantized and descent
    baselines may only be worse.
    """
    cap = resolve_ml_cap(ml_cap)
    length = signature_set.length
    matrix = correlation_matrix(signature_set)
    tsc_before = tsc(signature_set)

    quantized = quantize_sign(min_eigenpair(matrix).vector)
    quant_metric = quadratic_metric(matrix, quantized)
    descent_metric = local_descent_baseline(matrix, quantized).best_metric
    sd_metric = sphere_search(matrix, float(quant_metric)).best_metric
    ml_metric = ml_exhaustive(matrix, cap).best_metric
    if sd_metric != ml_metric:
        raise InternalConsistencyError(
            f"sphere metric {sd_metric} != exhaustive metric {ml_metric} "
            f"at K={signature_set.k}, L={length}"
        )

    return CompareRow(
        k_after=signature_set.k + 1,
        length=length,
        tsc_before=tsc_before,
        tsc_quant=tsc_increment(tsc_before, quant_metric, length),
        tsc_descent=tsc_increment(tsc_before, descent_metric, length),
        tsc_sd=tsc_increment(tsc_before, sd_metric, length),
        tsc_ml=tsc_increment(tsc_before, ml_metric, length),
    )


def one_shot_experiment(
    set_paths, *, ml_cap: int | None = None, table: BoundTable | None = None
) -> CompareReport:
    """Batch comparison over set files, with TSC-minus-bound gap columns.

    Per-file load and validation errors land in that file's entry; the rest
    of the batch still runs. Consistency failures are not per-file errors
    and propagate.
    """
    entries = []
    for path in set_paths:
        path = str(path)
        try:
            loaded = load_set(path)
            row = compare_methods(loaded, ml_cap=ml_cap)
        except (OSError, SetFormatError, ValueError, Underloaded) as exc:
            entries.append(CompareEntry(path=path, error=str(exc)))
            continue
        bound = _bound_after(row.k_after, row.length, table)
        entries.append(
            CompareEntry(
                path=path,
                row=row,
                bound=bound,
                gap_quant=row.tsc_quant - bound.value,
                gap_descent=row.tsc_descent - bound.value,
                gap_sd=row.tsc_sd - bound.value,
                gap_ml=row.tsc_ml - bound.value,
            )
        )
    return CompareReport(entries=tuple(entries))


def _float_cell(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _flag_cell(value: bool | None) -> str:
    return "" if value is None else ("true" if value else "false")


_CHAIN_COLUMNS = [
    "step",
    "k_before",
    "k_after",
    "length",
    "method",
    "metric",
    "tsc_before",
    "tsc_after",
    "radius_c",
    "lambda_min",
    "nodes_visited",
    "candidates_enumerated",
    "fp_bound",
    "jitter_applied",
    "welch_after",
    "binary_bound_after",
    "binary_bound_kind",
    "audit_agreement",
]

_COMPARE_COLUMNS = [
    "path",
    "k_after",
    "length",
    "tsc_before",
    "tsc_quant",
    "tsc_descent",
    "tsc_sd",
    "tsc_ml",
    "binary_bound",
    "binary_bound_kind",
    "gap_quant",
    "gap_descent",
    "gap_sd",
    "gap_ml",
    "error",
]


def _record_json(record: ExtensionRecord, agreement: bool | None) -> dict:
    return {
        "k_before": record.k_before,
        "k_after": record.k_after,
        "length": record.length,
        "method": _METHOD_LABELS[record.method],
        "metric": record.metric,
        "tsc_before": record.tsc_before,
        "tsc_after": record.tsc_after,
        "radius_c": record.radius_c,
        "lambda_min": record.lambda_min,
        "nodes_visited": record.nodes_visited,
        "candidates_enumerated": record.candidates_enumerated,
        "fp_bound": record.fp_bound,
        "jitter_applied": record.jitter_applied,
        "welch_after": {"value": record.welch_after.value, "kind": record.welch_after.kind},
        "binary_bound_after": {
            "value": record.binary_bound_after.value,
            "kind": record.binary_bound_after.kind,
        },
        "audit_agreement": agreement,
    }


def _chain_csv(report: ChainReport, writer) -> None:
    writer.writerow(_CHAIN_COLUMNS)
    for step, (record, agreement) in enumerate(zip(report.records, report.audit), start=1):
        writer.writerow(
            [
                step,
                record.k_before,
                record.k_after,
                record.length,
                _METHOD_LABELS[record.method],
                record.metric,
                record.tsc_before,
                record.tsc_after,
                repr(record.radius_c),
                repr(record.lambda_min),
                record.nodes_visited,
                record.candidates_enumerated,
                _float_cell(record.fp_bound),
                _flag_cell(record.jitter_applied),
                record.welch_after.value,
                record.binary_bound_after.value,
                record.binary_bound_after.kind,
                _flag_cell(agreement),
            ]
        )


def _compare_csv(report: CompareReport, writer) -> None:
    writer.writerow(_COMPARE_COLUMNS)
    for entry in report.entries:
        if entry.error is not None:
            writer.writerow([entry.path] + [""] * 13 + [entry.error])
            continue
        row = entry.row
        writer.writerow(
            [
                entry.path,
                row.k_after,
                row.length,
                row.tsc_before,
                row.tsc_quant,
                row.tsc_descent,
                row.tsc_sd,
                row.tsc_ml,
                entry.bound.value,
                entry.bound.kind,
                entry.gap_quant,
                entry.gap_descent,
                entry.gap_sd,
                entry.gap_ml,
                "",
            ]
        )


def emit_report(report, fmt: str) -> bytes:
    """Serialize a ChainReport or CompareReport; same input, same bytes.

    CSV columns are fixed (see the README); JSON documents carry a schema
    tag. Floats use repr, absent values serialize as null/empty.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"format must be 'json' or 'csv', got {fmt!r}")
    if isinstance(report, ChainReport):
        if fmt == "json":
            doc = {
                "schema": REPORT_SCHEMA,
                "kind": "chain",
                "method": _METHOD_LABELS[report.method],
                "initial": {"k": report.initial_k, "length": report.initial_length},
                "steps": [
                    _record_json(record, agreement)
                    for record, agreement in zip(report.records, report.audit)
                ],
            }
        else:
            buffer = io.StringIO()
            _chain_csv(report, csv.writer(buffer, lineterminator="\n"))
            return buffer.getvalue().encode("utf-8")
    elif isinstance(report, CompareReport):
        if fmt == "json":
            doc = {
                "schema": REPORT_SCHEMA,
                "kind": "compare",
                "entries": [
                    {
                        "path": entry.path,
                        "error": entry.error,
                        "k_after": entry.row.k_after if entry.row else None,
                        "length": entry.row.length if entry.row else None,
                        "tsc_before": entry.row.tsc_before if entry.row else None,
                        "tsc_quant": entry.row.tsc_quant if entry.row else None,
                        "tsc_descent": entry.row.tsc_descent if entry.row else None,
                        "tsc_sd": entry.row.tsc_sd if entry.row else None,
                        "tsc_ml": entry.row.tsc_ml if entry.row else None,
                        "binary_bound": (
                            {"value": entry.bound.value, "kind": entry.bound.kind}
                            if entry.bound
                            else None
                        ),
                        "gap_quant": entry.gap_quant,
                        "gap_descent": entry.gap_descent,
                        "gap_sd": entry.gap_sd,
                        "gap_ml": entry.gap_ml,
                    }
                    for entry in report.entries
                ],
            }
        else:
            buffer = io.StringIO()
            _compare_csv(report, csv.writer(buffer, lineterminator="\n"))
            return buffer.getvalue().encode("utf-8")
    else:
        raise ValueError(f"cannot serialize {type(report).__name__}")
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
    return (text + "\n").encode("utf-8")
