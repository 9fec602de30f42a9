"""Cubic and square matrix value types and their multiplications.

A cubic matrix is an m x m x m real array.  Two products are provided:

* ``slice_product`` -- c[i,j,r] = sum_k a[i,j,k] b[k,j,r]; each middle
  slice multiplies independently (induced by the double-Kronecker rule
  on basis elements).
* ``op_product`` -- the product coupled through a binary operation table
  ``a(l,n)`` on the index set: c[i,j,r] = sum over pairs (l,n) with
  a(l,n) = j of sum_k A[i,l,k] B[k,n,r].  Entries whose preimage
  {(l,n): a(l,n) = j} is empty are zero.

All indices are 0-based.  Values are immutable after construction and
every operation is a pure function, so the module is safe for
unrestricted concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "CubicMatrix", "SquareMatrix", "BinaryOp", "OpAnalysis",
    "basis", "slice_product", "op_product", "analyze_op",
    "middle_marginal", "first_slice", "square_product",
]


def _as_locked(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class CubicMatrix:
    """Immutable m x m x m real array."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 3 or len(set(arr.shape)) != 1 or arr.shape[0] < 1:
            raise ValueError(f"cubic matrix needs shape (m, m, m), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("cubic matrix entries must be finite")
        object.__setattr__(self, "entries", _as_locked(arr))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def __add__(self, other: "CubicMatrix") -> "CubicMatrix":
        return CubicMatrix(self.entries + other.entries)

    def __sub__(self, other: "CubicMatrix") -> "CubicMatrix":
        return CubicMatrix(self.entries - other.entries)

    def __mul__(self, scalar: float) -> "CubicMatrix":
        return CubicMatrix(self.entries * float(scalar))

    __rmul__ = __mul__

    def allclose(self, other: "CubicMatrix", tol: float = 1e-12) -> bool:
        return bool(np.abs(self.entries - other.entries).max() <= tol)


@dataclass(frozen=True, eq=False)
class SquareMatrix:
    """Immutable m x m real array (marginals, slices, process families)."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"square matrix needs shape (m, m), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("square matrix entries must be finite")
        object.__setattr__(self, "entries", _as_locked(arr))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: "SquareMatrix") -> "SquareMatrix":
        if self.m != other.m:
            raise ValueError(f"dimension mismatch: {self.m} vs {other.m}")
        return SquareMatrix(self.entries @ other.entries)

    def __add__(self, other: "SquareMatrix") -> "SquareMatrix":
        return SquareMatrix(self.entries + other.entries)

    def __sub__(self, other: "SquareMatrix") -> "SquareMatrix":
        return SquareMatrix(self.entries - other.entries)

    def __mul__(self, scalar: float) -> "SquareMatrix":
        return SquareMatrix(self.entries * float(scalar))

    __rmul__ = __mul__

    def allclose(self, other: "SquareMatrix", tol: float = 1e-12) -> bool:
        return bool(np.abs(self.entries - other.entries).max() <= tol)


@dataclass(frozen=True, eq=False)
class BinaryOp:
    """Operation table a: I x I -> I with table[j, n] = a(j, n).

    The preimage buckets {(l, n): a(l, n) = j} are precomputed once so
    products reuse them.
    """

    table: np.ndarray
    name: str = "custom"
    preimages: tuple = field(init=False, repr=False)

    def __post_init__(self):
        table = np.asarray(self.table)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] < 1:
            raise ValueError(f"operation table needs shape (m, m), got {table.shape}")
        if not np.issubdtype(table.dtype, np.integer):
            raise ValueError("operation table must be integer valued")
        m = table.shape[0]
        if table.min() < 0 or table.max() >= m:
            raise ValueError(f"table values must lie in [0, {m})")
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        buckets = tuple(np.argwhere(table == j) for j in range(m))
        object.__setattr__(self, "preimages", buckets)

    @property
    def m(self) -> int:
        return self.table.shape[0]

    def __call__(self, j: int, n: int) -> int:
        return int(self.table[j, n])

    @classmethod
    def mod(cls, m: int) -> "BinaryOp":
        """Addition mod m (the uniquely solvable group operation)."""
        idx = np.arange(m)
        return cls((idx[:, None] + idx[None, :]) % m, name="mod")

    @classmethod
    def max_op(cls, m: int) -> "BinaryOp":
        """max(j, n); associative but not uniquely solvable for m >= 2."""
        idx = np.arange(m)
        return cls(np.maximum(idx[:, None], idx[None, :]), name="max")

    @classmethod
    def from_table(cls, rows: Sequence[Sequence[int]], name: str = "custom") -> "BinaryOp":
        return cls(np.asarray(rows, dtype=int), name=name)


@dataclass(frozen=True)
class OpAnalysis:
    """Associativity/solvability report with concrete failure witnesses."""

    associative: bool
    associativity_witness: Optional[tuple[int, int, int]]
    right_solvable: bool
    right_witness: Optional[tuple[int, int, tuple[int, ...]]]
    left_solvable: bool
    left_witness: Optional[tuple[int, int, tuple[int, ...]]]


def analyze_op(op: BinaryOp) -> OpAnalysis:
    """Check associativity and left/right unique solvability exhaustively.

    Right solvability: a(x, u) = v has exactly one solution x for every
    (u, v); equivalently every column of the table is a permutation.
    Left solvability is the row-wise statement.
    """
    table = op.table
    lhs = table[table, :]          # lhs[x, y, z] = a(a(x, y), z)
    rhs = table[:, table]          # rhs[x, y, z] = a(x, a(y, z))
    mismatch = np.argwhere(lhs != rhs)
    assoc_witness = tuple(int(v) for v in mismatch[0]) if len(mismatch) else None

    def solvability(columns: np.ndarray):
        for u in range(op.m):
            for v in range(op.m):
                solutions = tuple(int(x) for x in np.flatnonzero(columns[:, u] == v))
                if len(solutions) != 1:
                    return False, (u, v, solutions)
        return True, None

    right_ok, right_witness = solvability(table)
    left_ok, left_witness = solvability(table.T)
    return OpAnalysis(
        associative=assoc_witness is None,
        associativity_witness=assoc_witness,
        right_solvable=right_ok,
        right_witness=right_witness,
        left_solvable=left_ok,
        left_witness=left_witness,
    )


def basis(m: int, i: int, j: int, k: int) -> CubicMatrix:
    """Basis cubic matrix with a single 1 at (i, j, k)."""
    for name, idx in (("i", i), ("j", j), ("k", k)):
        if not 0 <= idx < m:
            raise ValueError(f"index {name}={idx} out of range [0, {m})")
    entries = np.zeros((m, m, m))
    entries[i, j, k] = 1.0
    return CubicMatrix(entries)


def _same_m(a: CubicMatrix, b: CubicMatrix) -> int:
    if a.m != b.m:
        raise ValueError(f"dimension mismatch: {a.m} vs {b.m}")
    return a.m


def slice_product(a: CubicMatrix, b: CubicMatrix) -> CubicMatrix:
    """c[i,j,r] = sum_k a[i,j,k] * b[k,j,r] (middle slices multiply independently)."""
    _same_m(a, b)
    return CubicMatrix(np.einsum("ijk,kjr->ijr", a.entries, b.entries))


def op_product(a: CubicMatrix, b: CubicMatrix, op: BinaryOp) -> CubicMatrix:
    """Table-coupled product: c[i,j,r] = sum_{(l,n): op(l,n)=j} sum_k a[i,l,k] b[k,n,r].

    Accepts non-associative tables too; associativity of the product is
    only guaranteed when the table is associative (see analyze_op).
    """
    m = _same_m(a, b)
    if op.m != m:
        raise ValueError(f"operation table dimension {op.m} does not match matrices ({m})")
    # partial[l, n] = A[:, l, :] @ B[:, n, :], then bucket-sum by op value
    partial = np.einsum("ilk,knr->lnir", a.entries, b.entries)
    result = np.zeros((m, m, m))
    for j, pairs in enumerate(op.preimages):
        if len(pairs):
            result[:, j, :] = partial[pairs[:, 0], pairs[:, 1]].sum(axis=0)
    return CubicMatrix(result)


def middle_marginal(a: CubicMatrix) -> SquareMatrix:
    """q[i,r] = sum_j a[i,j,r] (sums out the middle index)."""
    return SquareMatrix(a.entries.sum(axis=1))


def first_slice(a: CubicMatrix) -> SquareMatrix:
    """c[i,j] = a[i, 0, j], the slice at middle index 0."""
    return SquareMatrix(a.entries[:, 0, :])


def square_product(p: SquareMatrix, q: SquareMatrix) -> SquareMatrix:
    """Ordinary matrix product."""
    return p @ q
