"""Two-time consistency verification (Kolmogorov-Chapman equation).

A cubic family is consistent under an operation table when
M[s,t] = M[s,tau] * M[tau,t] for every ordered triple s < tau < t; a
square or scalar family uses the ordinary matrix (or scalar) product.
Residuals are max-norm entrywise differences, which localises failures
sharply.  All ordered triples of a grid are tested, not just
consecutive ones, so parameter functions that only cancel telescopically
on adjacent steps are caught.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import BinaryOp, op_product
from .families import MatrixFamily, validate_domain
from .stochasticity import StochKind, check_kind

__all__ = [
    "TimeGrid", "KceReport", "ImpossibilityCertificate",
    "kce_residual", "verify_grid", "square_kce_residual",
    "verify_square_grid", "impossibility_demo",
]

DEFAULT_TOL = 1e-9
SQUARE_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing nonnegative times; at least 3 points so
    ordered triples exist."""

    times: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if len(times) < 3:
            raise ValueError("grid needs at least 3 points to form triples")
        if times[0] < 0:
            raise ValueError("grid times must be nonnegative")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("grid times must be strictly increasing")
        object.__setattr__(self, "times", times)

    @classmethod
    def linspace(cls, start: float, stop: float, count: int) -> "TimeGrid":
        return cls(tuple(np.linspace(start, stop, count)))

    @classmethod
    def integers(cls, n: int) -> "TimeGrid":
        return cls(tuple(float(k) for k in range(n)))

    @classmethod
    def from_spec(cls, spec: str) -> "TimeGrid":
        """Parse "start:stop:count" (inclusive linspace) or "int:n" (0..n-1)."""
        if spec.startswith("int:"):
            return cls.integers(int(spec[4:]))
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be 'start:stop:count' or 'int:n', "
                             f"got {spec!r}")
        return cls.linspace(float(parts[0]), float(parts[1]), int(parts[2]))

    def pairs(self) -> list:
        ts = self.times
        return [(ts[i], ts[j]) for i in range(len(ts)) for j in range(i + 1, len(ts))]

    def triples(self) -> list:
        ts = self.times
        n = len(ts)
        return [(ts[i], ts[j], ts[k])
                for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)]


@dataclass(frozen=True)
class KceReport:
    """Verification result on one grid.

    verdict is true iff no domain violations, every sampled pair is
    stochastic in the requested sense (when one was requested), and the
    worst residual is within tolerance.
    """

    family: str
    op_name: Optional[str]
    sigma: Optional[StochKind]
    tol: float
    grid: tuple
    verdict: bool
    worst_residual: Optional[float]
    worst_triple: Optional[tuple]
    residuals: tuple
    stochastic_pairs: Optional[tuple]
    violations: tuple

    def summary_lines(self) -> list:
        lines = [f"family:   {self.family}"]
        if self.op_name is not None:
            lines.append(f"op:       {self.op_name}")
        if self.sigma is not None:
            lines.append(f"sigma:    ({self.sigma.value})")
        lines.append(f"grid:     {len(self.grid)} points "
                     f"[{self.grid[0]:g} .. {self.grid[-1]:g}]")
        lines.append(f"tol:      {self.tol:g}")
        for v in self.violations:
            lines.append(f"violation: {v}")
        if self.worst_residual is not None:
            s, tau, t = self.worst_triple
            lines.append(f"worst residual: {self.worst_residual:.3e} "
                         f"at (s={s:g}, tau={tau:g}, t={t:g})")
        if self.stochastic_pairs is not None:
            bad = [p for p in self.stochastic_pairs if not p[2]]
            if bad:
                s, t, _, viol = bad[0]
                lines.append(f"stochasticity fails at {len(bad)} pair(s), e.g. "
                             f"(s={s:g}, t={t:g}) with violation {viol:.3e}")
            else:
                lines.append("stochasticity holds at every sampled pair")
        lines.append(f"verdict:  {'PASS' if self.verdict else 'FAIL'}")
        return lines


def kce_residual(fam: MatrixFamily, op: BinaryOp, s: float, tau: float,
                 t: float) -> float:
    """max |M[s,t] - M[s,tau] * M[tau,t]| for a cubic family."""
    if not (0 <= s < tau < t):
        raise ValueError(f"times must satisfy 0 <= s < tau < t, "
                         f"got ({s}, {tau}, {t})")
    direct = fam.evaluate(s, t)
    composed = op_product(fam.evaluate(s, tau), fam.evaluate(tau, t), op)
    return float(np.abs(direct.entries - composed.entries).max())


def square_kce_residual(fam: MatrixFamily, s: float, tau: float, t: float) -> float:
    """max |Q[s,t] - Q[s,tau] Q[tau,t]|; scalars use the plain product."""
    if not (0 <= s < tau < t):
        raise ValueError(f"times must satisfy 0 <= s < tau < t, "
                         f"got ({s}, {tau}, {t})")
    direct = fam.evaluate(s, t)
    left = fam.evaluate(s, tau)
    right = fam.evaluate(tau, t)
    if fam.kind == "scalar":
        return abs(direct - left * right)
    return float(np.abs(direct.entries - (left @ right).entries).max())


def _residual_sweep(residual_fn, grid: TimeGrid):
    residuals = []
    worst = -1.0
    worst_triple = None
    for s, tau, t in grid.triples():
        r = residual_fn(s, tau, t)
        residuals.append((s, tau, t, r))
        if r > worst:
            worst, worst_triple = r, (s, tau, t)
    return tuple(residuals), worst, worst_triple


def verify_grid(fam: MatrixFamily, op: BinaryOp, grid: TimeGrid,
                sigma: StochKind, tol: float = DEFAULT_TOL) -> KceReport:
    """Full check that ``fam`` is a (sigma | op)-type process on the grid.

    Domain violations short-circuit the sweep: the family cannot be
    evaluated reliably outside its validity domain, so they are
    reported and the verdict is false.
    """
    if fam.kind != "cubic":
        raise ValueError(f"verify_grid needs a cubic family, got {fam.kind}")
    violations = validate_domain(fam, grid.pairs())
    if violations:
        return KceReport(
            family=fam.describe(), op_name=op.name, sigma=sigma, tol=tol,
            grid=grid.times, verdict=False, worst_residual=None,
            worst_triple=None, residuals=(), stochastic_pairs=None,
            violations=tuple(violations),
        )
    stochastic = []
    all_ok = True
    for s, t in grid.pairs():
        kc = check_kind(fam.evaluate(s, t), sigma, tol)
        stochastic.append((s, t, kc.holds, kc.max_violation))
        all_ok = all_ok and kc.holds
    residuals, worst, worst_triple = _residual_sweep(
        lambda s, tau, t: kce_residual(fam, op, s, tau, t), grid)
    return KceReport(
        family=fam.describe(), op_name=op.name, sigma=sigma, tol=tol,
        grid=grid.times, verdict=all_ok and worst <= tol,
        worst_residual=worst, worst_triple=worst_triple,
        residuals=residuals, stochastic_pairs=tuple(stochastic),
        violations=(),
    )


def verify_square_grid(fam: MatrixFamily, grid: TimeGrid,
                       tol: float = SQUARE_TOL) -> KceReport:
    """Residual-only sweep for square and scalar families."""
    if fam.kind == "cubic":
        raise ValueError("verify_square_grid needs a square or scalar family")
    residuals, worst, worst_triple = _residual_sweep(
        lambda s, tau, t: square_kce_residual(fam, s, tau, t), grid)
    return KceReport(
        family=fam.describe(), op_name=None, sigma=None, tol=tol,
        grid=grid.times, verdict=worst <= tol,
        worst_residual=worst, worst_triple=worst_triple,
        residuals=residuals, stochastic_pairs=None, violations=(),
    )


@dataclass(frozen=True)
class ImpossibilityCertificate:
    """Why no single-index-stochastic family can satisfy the equation.

    A cubic family that is 1-, 2- or 3-stochastic forces its middle
    marginal to carry the corresponding sum property (column sums m,
    all entries 1, or row sums m).  The marginal of any consistent
    family must itself satisfy the square equation, but then the sums
    multiply: m becomes m^2 (or 1 becomes m), a contradiction for m > 1.
    Everything here is exact integer arithmetic.
    """

    kind: StochKind
    m: int
    required_value: int
    product_value: int
    witness: tuple
    witness_product: tuple
    contradiction: bool

    def explanation(self) -> str:
        what = {StochKind.S1: "column sums", StochKind.S2: "entries",
                StochKind.S3: "row sums"}[self.kind]
        return (f"{self.kind.value}-stochastic needs marginal {what} = "
                f"{self.required_value}, but the product has {what} = "
                f"{self.product_value} != {self.required_value}")


def impossibility_demo(kind: StochKind, m: int) -> ImpossibilityCertificate:
    if kind not in (StochKind.S1, StochKind.S2, StochKind.S3):
        raise ValueError(f"certificate applies to kinds 1, 2, 3; got {kind}")
    if m <= 1:
        raise ValueError("the contradiction needs m > 1")
    witness = np.ones((m, m), dtype=np.int64)  # has all three sum properties
    product = witness @ witness                # every entry equals m
    if kind is StochKind.S1:
        required, got = m, int(product.sum(axis=0)[0])
    elif kind is StochKind.S3:
        required, got = m, int(product.sum(axis=1)[0])
    else:
        required, got = 1, int(product[0, 0])
    return ImpossibilityCertificate(
        kind=kind, m=m, required_value=required, product_value=got,
        witness=tuple(tuple(int(v) for v in row) for row in witness),
        witness_product=tuple(tuple(int(v) for v in row) for row in product),
        contradiction=got != required,
    )
