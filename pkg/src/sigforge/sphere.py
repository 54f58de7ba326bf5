"""Sphere-decoder search over the antipodal cube {-1, +1}^L.

The minimum of s^T R s is found by factoring R = U^T U, bounding each
coordinate through the weighted-square form of ||U s||^2, and walking the
resulting interval tree depth first with a fixed squared radius. The radius
comes from the sign-quantized minimum eigenvector, which guarantees the true
minimizer lies inside the sphere; every enumerated candidate is re-scored in
exact integer arithmetic, so floating point can only ever admit extra
candidates, never corrupt the argmin.

Also provides the exhaustive scan used as the optimality oracle and a plain
single-bit-flip descent baseline for method comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundOverflow, fp_operation_bound
from .linalg import CholeskyFactor, cholesky, min_eigenpair, quantize_sign
from .sigcore import (
    CorrelationMatrix,
    Signature,
    SignatureSet,
    correlation_matrix,
    quadratic_metric,
)

__all__ = [
    "QDecomposition",
    "SearchState",
    "SearchResult",
    "ExtensionDetail",
    "EmptySphere",
    "CapExceeded",
    "radius_squared",
    "q_decomposition",
    "interval_bounds",
    "sphere_search",
    "ml_exhaustive",
    "local_descent_baseline",
    "extend_optimal",
    "RADIUS_EPS",
    "DEFAULT_ML_CAP",
]

# Multiplicative slack on the float budget; a boundary candidate (metric
# exactly equal to the radius) must never be lost to rounding.
RADIUS_EPS = 1e-9
# Budget updates subtract terms of magnitude ~||R||, so leftover budgets
# carry absolute rounding noise at ulp(||R||) scale regardless of how small
# the radius is. The additive slack BUDGET_ABS_EPS * ||R||_max * L covers
# that noise; metrics are integers, so any slack well below 1 can only admit
# boundary candidates, never wrong ones (exact re-scoring settles the rest).
BUDGET_ABS_EPS = 1e-12
DEFAULT_ML_CAP = 24

_CHUNK = 1 << 16


class EmptySphere(RuntimeError):
    """Search finished with no candidate inside the radius.

    Impossible when the radius is the quantized-eigenvector metric; callers
    treat this as an internal-consistency failure, not an input error.
    """


class CapExceeded(RuntimeError):
    """Exhaustive scan refused: 2^(L-1) points exceeds the configured cap."""


@dataclass(frozen=True, eq=False)
class QDecomposition:
    """Weighted-square form of the factor: q_ii = u_ii^2, q_ij = u_ij / u_ii.

    ||U s||^2 == sum_i q_ii * (s_i + sum_{j>i} q_ij s_j)^2.
    """

    q_diag: np.ndarray
    q_upper: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.q_diag, dtype=np.float64)
        u = np.asarray(self.q_upper, dtype=np.float64)
        if d.ndim != 1 or u.shape != (d.size, d.size):
            raise ValueError("q_diag must be length L and q_upper L x L")
        if np.any(d <= 0.0):
            raise ValueError("q_diag entries must be strictly positive")
        if np.any(np.tril(u) != 0.0):
            raise ValueError("q_upper must be strictly upper triangular")
        d.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "q_diag", d)
        object.__setattr__(self, "q_upper", u)

    @property
    def dim(self) -> int:
        return int(self.q_diag.size)


@dataclass(frozen=True)
class SearchState:
    """One expanded node: budget and offset seen at ``level`` when the entry
    was fixed, plus the fixed tail (s_level, ..., s_L)."""

    level: int
    delta: float
    budget: float
    partial: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SearchResult:
    """Outcome of one search, with exact integer scoring.

    ``candidates`` holds the enumerated (signature, exact metric) pairs in
    visit order when the search kind retains them (sphere does, the
    exhaustive and descent oracles do not). ``trace`` holds SearchState
    nodes when requested. ``radius_c`` is +inf for the unbounded oracles.
    """

    best: Signature
    best_metric: int
    candidates_enumerated: int
    nodes_visited: int
    radius_c: float
    ties: int
    candidates: tuple | None = None
    trace: tuple | None = None


@dataclass(frozen=True)
class ExtensionDetail:
    """Per-extension diagnostics from the full pipeline run."""

    radius_c: float
    lambda_min: float
    quant_metric: int
    best_metric: int
    nodes_visited: int
    candidates_enumerated: int
    fp_bound: float | None
    jitter_applied: bool


def _lexkey(chips) -> tuple[int, ...]:
    # +1 sorts before -1.
    return tuple(0 if c == 1 else 1 for c in chips)


def radius_squared(matrix: CorrelationMatrix, quantized: Signature) -> float:
    """Squared search radius: the exact metric of the quantized eigenvector.

    The cube minimizer of s^T R s can do no worse than any particular cube
    point, so a sphere of this radius always contains it.
    """
    return float(quadratic_metric(matrix, quantized))


def q_decomposition(factor: CholeskyFactor) -> QDecomposition:
    """Rescale an upper-triangular factor into the weighted-square form."""
    u = factor.entries
    d = np.diag(u)
    q_diag = d * d
    q_upper = u / d[:, np.newaxis]
    q_upper = np.triu(q_upper, 1)
    return QDecomposition(q_diag=q_diag, q_upper=q_upper)


def interval_bounds(budget: float, q_kk: float, delta: float) -> tuple[int, int]:
    """Integer range for one coordinate, clamped to [-1, +1].

    Admissible values v satisfy q_kk * (delta + v)^2 <= budget. Returns
    (LB, UB); LB > UB means the subtree is pruned. Only -1 and +1 inside
    the range are antipodal candidates (an interval reduced to {0} prunes
    too).
    """
    if q_kk <= 0.0:
        raise ValueError("q_kk must be strictly positive")
    if budget < 0.0:
        return (1, 0)
    root = math.sqrt(budget / q_kk)
    ub = min(int(math.floor(root - delta)), 1)
    lb = max(int(math.ceil(-root - delta)), -1)
    return (lb, ub)


def sphere_search(
    matrix: CorrelationMatrix,
    radius: float,
    *,
    tighten: bool = False,
    collect_trace: bool = False,
) -> SearchResult:
    """Depth-first enumeration of {s : s_L = +1, s^T R s <= radius}.

    The last coordinate is pinned to +1 (negating s preserves the metric, so
    nothing is lost). Coordinates are fixed from level L down to 1, +1 tried
    before -1, with the budget and offset updated recursively; the radius is
    fixed for the whole walk. Enumerated candidates are re-scored exactly
    and the minimum-metric one is returned, ties broken lexicographically
    with +1 < -1.

    ``tighten`` shrinks the working budget to the best exact metric found so
    far (equal-metric candidates are still admitted, so the returned optimum
    and tie-break never change, only the node counts). ``collect_trace``
    records a SearchState per expanded node.

    Raises EmptySphere when no candidate lies inside; with the quantized
    eigenvector radius that cannot happen.
    """
    if not (radius >= 0.0):
        raise ValueError("radius must be >= 0")
    factor = cholesky(matrix)
    qdec = q_decomposition(factor)
    dim = qdec.dim

    # Jitter shifts every float metric up by jitter * L; widen the budget by
    # the same amount so exact-metric membership is preserved.
    abs_slack = BUDGET_ABS_EPS * float(np.abs(matrix.entries).max()) * dim
    cap = (float(radius) + factor.jitter * dim) * (1.0 + RADIUS_EPS) + abs_slack
    q_diag = qdec.q_diag
    q_upper = qdec.q_upper

    work = np.zeros(dim, dtype=np.int64)
    nodes = 0
    candidates: list[tuple[Signature, int]] = []
    trace: list[SearchState] | None = [] if collect_trace else None
    best: tuple[int, tuple[int, ...], Signature] | None = None

    def visit(level: int, used: float) -> None:
        nonlocal nodes, cap, best
        idx = level - 1
        remaining = cap - used
        delta = float(q_upper[idx, idx + 1 :] @ work[idx + 1 :]) if level < dim else 0.0
        lb, ub = interval_bounds(remaining, float(q_diag[idx]), delta)
        for value in (1, -1):
            if value < lb or value > ub:
                continue
            if level == dim and value == -1:
                continue
            work[idx] = value
            nodes += 1
            if trace is not None:
                trace.append(
                    SearchState(
                        level=level,
                        delta=delta,
                        budget=remaining,
                        partial=tuple(int(x) for x in work[idx:]),
                    )
                )
            spent = used + float(q_diag[idx]) * (delta + value) ** 2
            if level == 1:
                sig = Signature(tuple(int(x) for x in work))
                exact = quadratic_metric(matrix, sig)
                candidates.append((sig, exact))
                key = (exact, _lexkey(sig))
                if best is None or key < (best[0], best[1]):
                    best = (exact, _lexkey(sig), sig)
                    if tighten:
                        shrunk = (exact + factor.jitter * dim) * (1.0 + RADIUS_EPS)
                        cap = min(cap, shrunk + abs_slack)
            else:
                visit(level - 1, spent)
        work[idx] = 0

    visit(dim, 0.0)

    if best is None:
        raise EmptySphere(
            f"no antipodal point within squared radius {radius!r} (L={dim})"
        )
    ties = sum(1 for _, m in candidates if m == best[0])
    return SearchResult(
        best=best[2],
        best_metric=best[0],
        candidates_enumerated=len(candidates),
        nodes_visited=nodes,
        radius_c=float(radius),
        ties=ties,
        candidates=tuple(candidates),
        trace=tuple(trace) if trace is not None else None,
    )


def _chunk_signs(start: int, stop: int, dim: int) -> np.ndarray:
    """Rows start..stop of the s_L=+1 half-cube in lexicographic order
    (+1 < -1), one coordinate per bit, s_1 highest."""
    idx = np.arange(start, stop, dtype=np.int64)
    signs = np.empty((idx.size, dim), dtype=np.int64)
    for col in range(dim - 1):
        bit = (idx >> (dim - 2 - col)) & 1
        signs[:, col] = 1 - 2 * bit
    signs[:, dim - 1] = 1
    return signs


def ml_exhaustive(matrix: CorrelationMatrix, cap: int = DEFAULT_ML_CAP) -> SearchResult:
    """Scan all 2^(L-1) sign vectors with s_L = +1 and return the minimum.

    Exact integer metrics throughout; the first minimum in lexicographic
    order wins, matching the sphere search tie-break. Raises CapExceeded
    for L above ``cap``.
    """
    dim = matrix.dim
    if dim > cap:
        raise CapExceeded(f"L={dim} exceeds the exhaustive-search cap of {cap}")
    total = 1 << (dim - 1)
    best_metric: int | None = None
    best_index = -1
    ties = 0
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        signs = _chunk_signs(start, stop, dim)
        metrics = ((signs @ matrix.entries) * signs).sum(axis=1)
        chunk_best = int(metrics.min())
        if best_metric is None or chunk_best < best_metric:
            best_metric = chunk_best
            best_index = start + int(np.argmax(metrics == chunk_best))
            ties = int((metrics == chunk_best).sum())
        elif chunk_best == best_metric:
            ties += int((metrics == chunk_best).sum())
    assert best_metric is not None
    chips = _chunk_signs(best_index, best_index + 1, dim)[0]
    best = Signature(tuple(int(x) for x in chips))
    return SearchResult(
        best=best,
        best_metric=best_metric,
        candidates_enumerated=total,
        nodes_visited=total,
        radius_c=math.inf,
        ties=ties,
    )


def local_descent_baseline(matrix: CorrelationMatrix, start: Signature) -> SearchResult:
    """Single-bit-flip steepest descent from ``start``; a deliberately plain
    baseline, not an optimal method.

    Scans indices in ascending order and takes the first strictly improving
    flip, restarting the scan after each move, until no flip helps. The
    start's sign is kept as given. ``nodes_visited`` counts exact metric
    evaluations; ``candidates_enumerated`` counts the points actually
    stepped through.
    """
    current = start
    metric = quadratic_metric(matrix, current)
    evals = 1
    points = 1
    improved = True
    while improved:
        improved = False
        for index in range(len(current)):
            trial = current.flipped(index)
            trial_metric = quadratic_metric(matrix, trial)
            evals += 1
            if trial_metric < metric:
                current = trial
                metric = trial_metric
                points += 1
                improved = True
                break
    return SearchResult(
        best=current,
        best_metric=metric,
        candidates_enumerated=points,
        nodes_visited=evals,
        radius_c=math.inf,
        ties=1,
    )


def extend_optimal(signature_set: SignatureSet) -> tuple[Signature, ExtensionDetail]:
    """Best next signature for a set: full radius-then-search pipeline.

    Builds the autocorrelation matrix, takes the quantized minimum
    eigenvector as the radius point, and sphere-searches with that exact
    radius. The returned metric provably equals the exhaustive minimum.
    """
    matrix = correlation_matrix(signature_set)
    pair = min_eigenpair(matrix)
    quantized = quantize_sign(pair.vector)
    quant_metric = quadratic_metric(matrix, quantized)
    radius = float(quant_metric)

    factor = cholesky(matrix)
    result = sphere_search(matrix, radius)

    # Reciprocal of the smallest squared diagonal caps the per-axis reach.
    diag = np.diag(factor.entries)
    scale = 1.0 / float((diag * diag).min())
    try:
        fp_bound = fp_operation_bound(matrix.dim, radius, scale)
    except BoundOverflow:
        fp_bound = None

    detail = ExtensionDetail(
        radius_c=radius,
        lambda_min=pair.value,
        quant_metric=quant_metric,
        best_metric=result.best_metric,
        nodes_visited=result.nodes_visited,
        candidates_enumerated=result.candidates_enumerated,
        fp_bound=fp_bound,
        jitter_applied=factor.jitter > 0.0,
    )
    return result.best, detail
