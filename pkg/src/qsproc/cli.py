"""Command-line front-end.

Subcommands:

* ``verify``    -- consistency sweep (cubic families against an operation
  table and a stochasticity kind; square/scalar families residual-only).
* ``classify``  -- stochasticity kinds of a matrix file or family, or the
  type set of an M7 spec.
* ``simulate``  -- distribution trajectories, CSV/JSON export, optional
  limit analysis and figure rendering.

Exit codes: 0 success / verdict true, 1 verification or validity
failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import fnexpr, io
from .algebra import BinaryOp, CubicMatrix
from .dynamics import (Distribution, StochasticityError, limit_estimate,
                       trajectory)
from .families import (FamilyDomainError, MatrixFamily, classify_m7_type,
                       family_param_names, make_family, make_m7)
from .kce import TimeGrid, verify_grid, verify_square_grid
from .stochasticity import StochKind, classify, square_class

__all__ = ["main", "build_parser"]


class ConfigError(Exception):
    """Bad flags, expressions, or input files (exit code 2)."""


def _parse_params(pairs: Optional[list]) -> dict:
    params = {}
    for item in pairs or []:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"--param needs NAME=EXPR, got {item!r}")
        params[name.strip().upper()] = value
    return params


def _infer_domain(ns, times=None) -> Optional[str]:
    """Pick the evaluation time domain from the explicit grid/times.

    int:n grids are discrete; start:stop:count grids are continuous;
    explicit sample times are discrete only when all integral.  None
    defers to the family's own default.
    """
    grid_spec = getattr(ns, "grid", None)
    if grid_spec:
        return "discrete" if grid_spec.startswith("int:") else "continuous"
    if times is not None:
        integral = all(abs(t - round(t)) <= 1e-9 for t in times)
        return "discrete" if integral else "continuous"
    return None


def _build_family(ns, time_domain: Optional[str] = None) -> MatrixFamily:
    params = _parse_params(getattr(ns, "param", None))
    family_id = ns.family.upper()
    try:
        if family_id == "M7":
            b_id = getattr(ns, "b_family", None)
            c_id = getattr(ns, "c_family", None)
            if not b_id or not c_id:
                raise ConfigError("--family M7 needs --b-family and --c-family")
            return _build_m7(b_id, c_id, params, time_domain)
        return make_family(family_id, params, time_domain=time_domain)
    except (ValueError, fnexpr.ParseError, fnexpr.EvalError) as exc:
        raise ConfigError(str(exc)) from None


def _build_m7(b_id: str, c_id: str, params: dict,
              time_domain: Optional[str] = None):
    def split_for(role: str, fid: str) -> dict:
        prefix = role + "_"
        accepted = family_param_names(fid)
        routed = {}
        for name, value in params.items():
            if name.startswith(prefix):
                routed[name[len(prefix):]] = value
            elif name.upper() in accepted and not name.startswith(("B_", "C_")):
                routed[name] = value
        return routed

    b = make_family(b_id, split_for("B", b_id.upper()), time_domain=time_domain)
    c = make_family(c_id, split_for("C", c_id.upper()), time_domain=time_domain)
    return make_m7(b, c)


def _build_op(spec: str, m: int):
    if spec == "mod":
        return BinaryOp.mod(m)
    if spec == "max":
        return BinaryOp.max_op(m)
    if spec.startswith("table:"):
        try:
            return io.load_op(spec[len("table:"):])
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"--op must be mod, max, or table:<path>, got {spec!r}")


def _build_grid(spec: Optional[str], fam: MatrixFamily) -> TimeGrid:
    if spec is None:
        spec = "int:8" if fam.time_domain == "discrete" else "0:4:8"
    try:
        return TimeGrid.from_spec(spec)
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from None


def _parse_x0(text: str) -> Distribution:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--x0 must be comma-separated numbers, got {text!r}")
    total = sum(values)
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"--x0 must sum to 1 within 1e-9, got sum {total!r}")
    if min(values) < 0:
        raise ConfigError(f"--x0 entries must be nonnegative, got {text!r}")
    return Distribution(values)


def _write_or_print(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify(ns) -> int:
    fam = _build_family(ns, _infer_domain(ns))
    grid = _build_grid(ns.grid, fam)
    if fam.kind == "cubic":
        if ns.sigma is None:
            raise ConfigError("cubic families need --sigma")
        try:
            sigma = StochKind.from_code(ns.sigma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        op = _build_op(ns.op, fam.m)
        if op.m != fam.m:
            raise ConfigError(f"operation table is {op.m}-dimensional but the "
                              f"family is {fam.m}-dimensional")
        tol = ns.tol if ns.tol is not None else 1e-9
        report = verify_grid(fam, op, grid, sigma, tol)
    else:
        tol = ns.tol if ns.tol is not None else 1e-12
        report = verify_square_grid(fam, grid, tol)
    for line in report.summary_lines():
        print(line)
    if ns.out:
        text = io.report_to_csv(report) if ns.out.endswith(".csv") \
            else io.report_to_json(report)
        Path(ns.out).write_text(text, encoding="utf-8")
    if ns.plot:
        from .plotting import save_residual_plot
        save_residual_plot(report, ns.plot)
    return 0 if report.verdict else 1


def cmd_classify(ns) -> int:
    if ns.m7:
        if not ns.b_family or not ns.c_family:
            raise ConfigError("--m7 needs --b-family and --c-family")
        params = _parse_params(ns.param)
        try:
            fam = _build_m7(ns.b_family, ns.c_family, params, _infer_domain(ns))
            grid = _build_grid(ns.grid, fam)
            types = classify_m7_type(fam.spec, grid.pairs(), ns.tol or 1e-9)
        except (ValueError, fnexpr.ParseError, fnexpr.EvalError) as exc:
            raise ConfigError(str(exc)) from None
        print(f"spec:  {fam.describe()}")
        if types:
            print("types: " + ", ".join(f"({tag})" for tag in sorted(types)))
        else:
            print("types: none")
        return 0

    tol = ns.tol if ns.tol is not None else 1e-9
    if ns.input:
        try:
            matrix = io.load_matrix(ns.input)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        source = ns.input
    elif ns.family:
        fam = _build_family(ns, _infer_domain(ns, [ns.s, ns.t]))
        try:
            matrix = fam.evaluate(ns.s, ns.t)
        except (FamilyDomainError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        source = f"{fam.describe()} at (s={ns.s:g}, t={ns.t:g})"
        if fam.kind == "scalar":
            print(f"input: {source}")
            print(f"value: {matrix!r}")
            return 0
    else:
        raise ConfigError("classify needs --input, --family, or --m7")

    print(f"input: {source}")
    if isinstance(matrix, CubicMatrix) and not ns.square:
        report = classify(matrix, tol)
        held = sorted(k.value for k in report.kinds)
        print("kinds: " + (", ".join(f"({code})" for code in held) if held else "none"))
        for kind in sorted(report.violations, key=lambda k: k.value):
            print(f"  ({kind.value}): worst violation {report.violations[kind]:.3e}")
    else:
        if isinstance(matrix, CubicMatrix):
            raise ConfigError(f"{source} holds a cubic matrix, not a square one")
        sc = square_class(matrix, tol)
        print(f"left stochastic:   {sc.left}")
        print(f"right stochastic:  {sc.right}")
        print(f"doubly stochastic: {sc.doubly}")
        print(f"total sum: {sc.total_sum:.17g}")
        print(f"row sums:  {', '.join(format(v, '.6g') for v in sc.row_sums)}")
        print(f"col sums:  {', '.join(format(v, '.6g') for v in sc.col_sums)}")
        if sc.min_entry < -tol:
            print(f"not stochastic (negative entry {sc.min_entry:.6g})")
    return 0


def cmd_simulate(ns) -> int:
    try:
        times = [float(v) for v in ns.times.split(",")]
    except ValueError:
        raise ConfigError(f"--times must be comma-separated numbers, got {ns.times!r}")
    fam = _build_family(ns, _infer_domain(ns, [ns.s] + times))
    if fam.kind != "cubic":
        raise ConfigError("simulate needs a cubic family")
    x0 = _parse_x0(ns.x0)
    if x0.m != fam.m:
        raise ConfigError(f"--x0 has {x0.m} entries but the family is "
                          f"{fam.m}-dimensional")
    try:
        traj = trajectory(fam, ns.mode, x0, ns.s, times, chained=ns.chained)
    except (StochasticityError, FamilyDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = io.trajectory_to_json(traj) if ns.format == "json" \
        else io.trajectory_to_csv(traj)
    _write_or_print(text, ns.out)
    if ns.plot:
        from .plotting import save_trajectory_plot
        save_trajectory_plot(traj, ns.plot, title=fam.describe())
    if ns.limit:
        try:
            report = limit_estimate(fam, ns.s, times, x0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        print(f"omega estimate: {report.omega_estimate}")
        if report.converged:
            print(f"admissible (|omega| <= 1/12): {report.admissible}")
        if report.limit_distribution is not None:
            probs = ", ".join(format(v, ".17g")
                              for v in report.limit_distribution.probs)
            print(f"limit distribution: ({probs})")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsproc",
        description="Cubic-matrix process families: verification, "
                    "classification, and simplex dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_family_flags(p, with_m7=True):
        p.add_argument("--family", required=False,
                       help="family id (M1..M7, Q1..Q7, ROT, ZERO, HALF, "
                            "CANTOR_A/B/C, UNIFORM)")
        p.add_argument("--param", action="append", metavar="NAME=EXPR",
                       help="parameter binding; repeatable (e.g. PHI='3^(-t)')")
        if with_m7:
            p.add_argument("--b-family", help="square family for the M7 marginal")
            p.add_argument("--c-family", help="square family for the M7 first slice")

    v = sub.add_parser("verify", help="consistency sweep over a time grid")
    add_family_flags(v)
    v.add_argument("--op", default="mod", help="mod | max | table:<path>")
    v.add_argument("--sigma", help="stochasticity kind: 12|13|23|1|2|3|twice")
    v.add_argument("--grid", help="start:stop:count or int:<n> "
                                  "(default 0:4:8, int:8 for discrete families)")
    v.add_argument("--tol", type=float, default=None,
                   help="residual tolerance (default 1e-9 cubic, 1e-12 square)")
    v.add_argument("--out", help="write the report (.json or .csv)")
    v.add_argument("--plot", help="render the residual sweep to this image file")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("classify", help="stochasticity kinds / M7 type set")
    add_family_flags(c)
    c.add_argument("--input", help="matrix JSON file")
    c.add_argument("--square", action="store_true",
                   help="treat/require the input as a square matrix")
    c.add_argument("--m7", action="store_true",
                   help="classify an M7 spec by its supported types")
    c.add_argument("--s", type=float, default=0.0, help="pair start (with --family)")
    c.add_argument("--t", type=float, default=1.0, help="pair end (with --family)")
    c.add_argument("--grid", help="grid for --m7 (default 0:4:8)")
    c.add_argument("--tol", type=float, default=None, help="tolerance (default 1e-9)")
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("simulate", help="distribution trajectory export")
    add_family_flags(s)
    s.add_argument("--mode", choices=("split", "quadratic"), default="split")
    s.add_argument("--x0", required=True, help="initial distribution, e.g. 0.9,0.1")
    s.add_argument("--s", type=float, default=0.0, help="start time")
    s.add_argument("--times", required=True, help="sample times, e.g. 0.5,1,2,3")
    s.add_argument("--chained", action="store_true",
                   help="step through consecutive pairs instead of fixed start")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", help="output file (default: stdout)")
    s.add_argument("--plot", help="render the trajectory to this image file")
    s.add_argument("--limit", action="store_true",
                   help="print the tail/limit analysis (M2 family)")
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if getattr(ns, "family", None) is None and not getattr(ns, "input", None) \
            and not getattr(ns, "m7", False):
        print("error: --family (or --input/--m7 for classify) is required",
              file=sys.stderr)
        return 2
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FamilyDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
