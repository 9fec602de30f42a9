"""Serialization: matrix/op JSON schemas, trajectory CSV/JSON, reports.

Matrix files are JSON objects {"m": int, "entries": nested arrays},
cubic as entries[i][j][k], square as entries[i][r], 0-based.  Operation
tables are {"m": int, "table": [[...]]} with table[j][n] = a(j, n).
CSV uses '.' decimals and 17 significant digits (round-trip exact for
64-bit floats); a header row is always present.  All writers are
deterministic: identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .algebra import BinaryOp, CubicMatrix, SquareMatrix
from .dynamics import Trajectory
from .kce import KceReport

__all__ = [
    "matrix_to_json", "save_matrix", "load_matrix",
    "op_to_json", "save_op", "load_op",
    "trajectory_to_csv", "trajectory_to_json",
    "report_to_json", "report_to_csv",
]

Matrix = Union[CubicMatrix, SquareMatrix]


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def matrix_to_json(matrix: Matrix) -> str:
    payload = {"m": matrix.m, "entries": matrix.entries.tolist()}
    return json.dumps(payload, indent=2) + "\n"


def save_matrix(path: Union[str, Path], matrix: Matrix) -> None:
    Path(path).write_text(matrix_to_json(matrix), encoding="utf-8")


def load_matrix(path: Union[str, Path]) -> Matrix:
    """Load a matrix file; dispatches on array depth (3 -> cubic, 2 -> square)."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        m = int(payload["m"])
        entries = np.asarray(payload["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: not a matrix file ({exc})") from None
    if entries.ndim == 3:
        matrix: Matrix = CubicMatrix(entries)
    elif entries.ndim == 2:
        matrix = SquareMatrix(entries)
    else:
        raise ValueError(f"{path}: entries must be a 2- or 3-deep array, "
                         f"got depth {entries.ndim}")
    if matrix.m != m:
        raise ValueError(f"{path}: declared m={m} but entries have m={matrix.m}")
    return matrix


def op_to_json(op: BinaryOp) -> str:
    payload = {"m": op.m, "table": op.table.tolist()}
    return json.dumps(payload, indent=2) + "\n"


def save_op(path: Union[str, Path], op: BinaryOp) -> None:
    Path(path).write_text(op_to_json(op), encoding="utf-8")


def load_op(path: Union[str, Path]) -> BinaryOp:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        m = int(payload["m"])
        table = np.asarray(payload["table"], dtype=int)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: not an operation-table file ({exc})") from None
    op = BinaryOp(table, name=str(payload.get("name", "custom")))
    if op.m != m:
        raise ValueError(f"{path}: declared m={m} but table has m={op.m}")
    return op


def trajectory_to_csv(traj: Trajectory) -> str:
    m = traj.states[0].m
    lines = [",".join(["t"] + [f"x_{i}" for i in range(m)])]
    for t, dist in traj.samples:
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in dist.probs]))
    return "\n".join(lines) + "\n"


def trajectory_to_json(traj: Trajectory) -> str:
    payload = {
        "start_time": traj.start_time,
        "samples": [{"t": t, "x": dist.probs.tolist()}
                    for t, dist in traj.samples],
    }
    return json.dumps(payload, indent=2) + "\n"


def report_to_json(report: KceReport) -> str:
    payload = {
        "family": report.family,
        "op": report.op_name,
        "sigma": report.sigma.value if report.sigma is not None else None,
        "tol": report.tol,
        "grid": list(report.grid),
        "verdict": report.verdict,
        "worst_residual": report.worst_residual,
        "worst_triple": list(report.worst_triple) if report.worst_triple else None,
        "violations": [{"s": v.s, "t": v.t, "condition": v.condition,
                        "value": None if v.value != v.value else v.value}
                       for v in report.violations],
        "stochasticity": None if report.stochastic_pairs is None else [
            {"s": s, "t": t, "holds": ok, "max_violation": viol}
            for s, t, ok, viol in report.stochastic_pairs],
        "residuals": [{"s": s, "tau": tau, "t": t, "residual": r}
                      for s, tau, t, r in report.residuals],
    }
    return json.dumps(payload, indent=2) + "\n"


def report_to_csv(report: KceReport) -> str:
    """Per-triple residual table (delimited form of the sweep)."""
    lines = ["s,tau,t,residual"]
    for s, tau, t, r in report.residuals:
        lines.append(",".join([_fmt(s), _fmt(tau), _fmt(t), _fmt(r)]))
    return "\n".join(lines) + "\n"
