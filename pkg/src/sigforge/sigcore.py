"""Binary antipodal signature sets with exact total-squared-correlation accounting.

Data model for spreading-code design: length-L signatures over {-1, +1},
ordered sets of K such signatures, their integer autocorrelation matrix
R = sum_i s_i s_i^T, and the TSC bookkeeping used everywhere else in the
package. All quantities here are exact Python/int64 integers; floating
point is confined to the numerical kernel modules. TSC values are plain
Python ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "Signature",
    "SignatureSet",
    "CorrelationMatrix",
    "SetFormatError",
    "tsc",
    "correlation_matrix",
    "quadratic_metric",
    "tsc_increment",
    "extend_set",
    "hadamard_set",
    "load_set",
    "save_set",
]


class SetFormatError(ValueError):
    """A signature-set file violates the text format."""


def _coerce_chip(value) -> int:
    if value == 1:
        return 1
    if value == -1:
        return -1
    raise ValueError(f"signature entries must be -1 or +1, got {value!r}")


@dataclass(frozen=True)
class Signature:
    """A length-L spreading code over the antipodal alphabet {-1, +1}.

    Immutable and hashable; the squared norm is exactly L by construction.
    """

    chips: tuple[int, ...]

    def __post_init__(self):
        chips = tuple(_coerce_chip(c) for c in self.chips)
        if not chips:
            raise ValueError("signature length must be >= 1")
        object.__setattr__(self, "chips", chips)

    def __len__(self) -> int:
        return len(self.chips)

    def __iter__(self) -> Iterator[int]:
        return iter(self.chips)

    def __getitem__(self, index):
        return self.chips[index]

    def __neg__(self) -> Signature:
        return Signature(tuple(-c for c in self.chips))

    def as_array(self) -> np.ndarray:
        """Entries as a fresh int64 vector."""
        return np.array(self.chips, dtype=np.int64)

    def flipped(self, index: int) -> Signature:
        """Copy with one chip negated."""
        chips = list(self.chips)
        chips[index] = -chips[index]
        return Signature(tuple(chips))

    def to_tokens(self) -> str:
        """Render as the file-format token row, e.g. ``+1 -1 +1 +1``."""
        return " ".join("+1" if c > 0 else "-1" for c in self.chips)


@dataclass(frozen=True)
class SignatureSet:
    """An ordered collection of K signatures sharing one common length L."""

    signatures: tuple[Signature, ...]

    def __post_init__(self):
        sigs = tuple(self.signatures)
        if not sigs:
            raise ValueError("signature set must contain at least one signature")
        for s in sigs:
            if not isinstance(s, Signature):
                raise TypeError(f"expected Signature, got {type(s).__name__}")
            if len(s) != len(sigs[0]):
                raise ValueError(
                    f"all signatures must share one length, got {len(s)} and {len(sigs[0])}"
                )
        object.__setattr__(self, "signatures", sigs)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> SignatureSet:
        return cls(tuple(Signature(tuple(row)) for row in rows))

    @property
    def k(self) -> int:
        return len(self.signatures)

    @property
    def length(self) -> int:
        return len(self.signatures[0])

    def __len__(self) -> int:
        return len(self.signatures)

    def __iter__(self) -> Iterator[Signature]:
        return iter(self.signatures)

    def __getitem__(self, index):
        return self.signatures[index]

    def matrix(self) -> np.ndarray:
        """Signatures stacked as a fresh K x L int64 array (one row per signature)."""
        return np.array([s.chips for s in self.signatures], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Integer autocorrelation matrix sum_i s_i s_i^T of a signature set.

    Symmetric with a constant diagonal equal to the number K of contributing
    signatures. Entries are stored as a read-only int64 array.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError("correlation matrix must be square and non-empty")
        if not np.issubdtype(a.dtype, np.integer):
            rounded = np.rint(a)
            if not np.array_equal(rounded, a):
                raise ValueError("correlation matrix entries must be integers")
            a = rounded
        a = a.astype(np.int64)
        if not np.array_equal(a, a.T):
            raise ValueError("correlation matrix must be symmetric")
        diag = np.diag(a)
        if int(diag.min()) != int(diag.max()) or int(diag[0]) < 1:
            raise ValueError("diagonal must be a constant signature count >= 1")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def k(self) -> int:
        """Number of signatures that built this matrix (the diagonal value)."""
        return int(self.entries[0, 0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorrelationMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)


def tsc(signature_set: SignatureSet) -> int:
    """Total squared correlation: sum over all ordered pairs of (s_i . s_j)^2.

    Exact integer result; equals trace((S S^T)^2) for the stacked matrix S.
    """
    gram = signature_set.matrix() @ signature_set.matrix().T
    return sum(int(g) * int(g) for g in gram.flat)


def correlation_matrix(signature_set: SignatureSet) -> CorrelationMatrix:
    """Exact integer autocorrelation matrix of the set."""
    m = signature_set.matrix()
    return CorrelationMatrix(m.T @ m)


def quadratic_metric(matrix: CorrelationMatrix, signature: Signature) -> int:
    """Exact integer quadratic form s^T R s.

    When R is the correlation matrix of a set, this equals the sum of squared
    inner products of s against every member, i.e. the TSC cost of adding s.
    """
    if matrix.dim != len(signature):
        raise ValueError(
            f"dimension mismatch: matrix is {matrix.dim}x{matrix.dim}, "
            f"signature has length {len(signature)}"
        )
    v = signature.as_array()
    return int(v @ matrix.entries @ v)


def tsc_increment(tsc_k: int, metric: int, length: int) -> int:
    """TSC of the enlarged set: tsc_k + L^2 + 2 * (s^T R s), exactly."""
    if metric < 0:
        raise ValueError("quadratic metric must be non-negative")
    if length < 1:
        raise ValueError("length must be >= 1")
    return int(tsc_k) + length * length + 2 * int(metric)


def extend_set(signature_set: SignatureSet, signature: Signature) -> SignatureSet:
    """New set with the signature appended; the original is unchanged."""
    if len(signature) != signature_set.length:
        raise ValueError(
            f"dimension mismatch: set has length {signature_set.length}, "
            f"signature has length {len(signature)}"
        )
    return SignatureSet(signature_set.signatures + (signature,))


def hadamard_set(length: int) -> SignatureSet:
    """Orthogonal K = L set from the doubling construction ([[H,H],[H,-H]], base [[+1]]).

    Meets the Welch bound with equality: tsc == K * L^2.
    """
    if length < 1 or (length & (length - 1)) != 0:
        raise ValueError(f"construction needs a power-of-two length, got {length}")
    h = np.array([[1]], dtype=np.int64)
    while h.shape[0] < length:
        h = np.block([[h, h], [h, -h]])
    return SignatureSet.from_rows(h.tolist())


def save_set(signature_set: SignatureSet, path) -> None:
    """Write the text format: header line ``K L``, then one token row per signature."""
    lines = [f"{signature_set.k} {signature_set.length}"]
    lines.extend(s.to_tokens() for s in signature_set)
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_chip_token(token: str, lineno: int) -> int:
    if token == "+1":
        return 1
    if token == "-1":
        return -1
    raise SetFormatError(
        f"line {lineno}: invalid entry {token!r} (alphabet is '+1'/'-1')"
    )


def load_set(path) -> SignatureSet:
    """Parse a signature-set file; inverse of save_set (bit-exact round trip).

    Lines starting with ``#`` and blank lines are ignored. Raises
    SetFormatError on a malformed header, wrong row count, ragged rows,
    or entries outside the +1/-1 alphabet.
    """
    content_lines = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        content_lines.append((lineno, stripped))
    if not content_lines:
        raise SetFormatError("empty file: missing 'K L' header")

    header_lineno, header = content_lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise SetFormatError(f"line {header_lineno}: header must be 'K L', got {header!r}")
    try:
        k, length = int(parts[0]), int(parts[1])
    except ValueError:
        raise SetFormatError(
            f"line {header_lineno}: header must hold two integers, got {header!r}"
        ) from None
    if k < 1 or length < 1:
        raise SetFormatError(f"line {header_lineno}: need K >= 1 and L >= 1, got K={k} L={length}")

    rows = content_lines[1:]
    if len(rows) != k:
        raise SetFormatError(f"header declares {k} rows, file has {len(rows)}")
    signatures = []
    for lineno, row in rows:
        tokens = row.split()
        if len(tokens) != length:
            raise SetFormatError(
                f"line {lineno}: expected {length} entries, got {len(tokens)}"
            )
        signatures.append(Signature(tuple(_parse_chip_token(t, lineno) for t in tokens)))
    return SignatureSet(tuple(signatures))
