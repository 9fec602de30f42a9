"""Stochasticity classification for cubic and square matrices.

A nonnegative cubic matrix P is (i,j)-stochastic when its entries sum
to 1 over indices i and j for each value of the remaining index, and
i-stochastic when the single-index sums equal 1.  Twice stochastic
adds the condition sum_i P[i,j,k] = 1/m to (2,3)-stochasticity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .algebra import CubicMatrix, SquareMatrix

__all__ = [
    "StochKind", "KindCheck", "ClassReport", "SquareClass",
    "check_kind", "classify", "square_class",
]

DEFAULT_TOL = 1e-9


class StochKind(enum.Enum):
    S12 = "12"
    S13 = "13"
    S23 = "23"
    S1 = "1"
    S2 = "2"
    S3 = "3"
    TWICE = "twice"

    @classmethod
    def from_code(cls, code: str) -> "StochKind":
        for kind in cls:
            if kind.value == code:
                return kind
        raise ValueError(f"unknown stochasticity code {code!r}; "
                         f"use one of {[k.value for k in cls]}")


# Axes summed over for each kind (the defining sums equal 1 per
# remaining index).
_SUM_AXES = {
    StochKind.S12: (0, 1),
    StochKind.S13: (0, 2),
    StochKind.S23: (1, 2),
    StochKind.S1: (0,),
    StochKind.S2: (1,),
    StochKind.S3: (2,),
}


@dataclass(frozen=True)
class KindCheck:
    holds: bool
    max_violation: float


@dataclass(frozen=True)
class ClassReport:
    """All kinds evaluated (cheap at desk scale), worst violation per kind."""

    kinds: frozenset
    violations: Mapping[StochKind, float]
    tol: float


@dataclass(frozen=True)
class SquareClass:
    left: bool
    right: bool
    doubly: bool
    total_sum: float
    row_sums: tuple
    col_sums: tuple
    min_entry: float


def _violation(a: CubicMatrix, kind: StochKind) -> float:
    entries = a.entries
    negativity = max(0.0, float(-entries.min()))
    if kind is StochKind.TWICE:
        base = _violation(a, StochKind.S23)
        column = float(np.abs(entries.sum(axis=0) - 1.0 / a.m).max())
        return max(base, column)
    sums = entries.sum(axis=_SUM_AXES[kind])
    return max(negativity, float(np.abs(sums - 1.0).max()))


def check_kind(a: CubicMatrix, kind: StochKind, tol: float = DEFAULT_TOL) -> KindCheck:
    """Nonnegativity plus the defining marginal sums for one kind."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    violation = _violation(a, kind)
    return KindCheck(holds=violation <= tol, max_violation=violation)


def classify(a: CubicMatrix, tol: float = DEFAULT_TOL) -> ClassReport:
    """Evaluate every kind and report which hold at the tolerance."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    violations = {kind: _violation(a, kind) for kind in StochKind}
    kinds = frozenset(k for k, v in violations.items() if v <= tol)
    return ClassReport(kinds=kinds, violations=violations, tol=tol)


def square_class(q: SquareMatrix, tol: float = DEFAULT_TOL) -> SquareClass:
    """Left/right/doubly stochastic flags plus the raw sums.

    The raw sums carry the square-side counterparts of the cubic kinds:
    total sum m for (1,3), column sums m for 1-stochastic, row sums m
    for 3-stochastic, all entries 1 for 2-stochastic.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    entries = q.entries
    rows = entries.sum(axis=1)
    cols = entries.sum(axis=0)
    nonneg = entries.min() >= -tol
    left = bool(nonneg and np.abs(cols - 1.0).max() <= tol)
    right = bool(nonneg and np.abs(rows - 1.0).max() <= tol)
    return SquareClass(
        left=left,
        right=right,
        doubly=left and right,
        total_sum=float(entries.sum()),
        row_sums=tuple(float(v) for v in rows),
        col_sums=tuple(float(v) for v in cols),
        min_entry=float(entries.min()),
    )
