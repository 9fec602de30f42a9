"""Closed-form two-time process families.

Each family maps an ordered time pair (s, t) to a cubic matrix, a
square matrix, or a scalar.  Cubic families use the 2x4 display layout

    [[P000, P001 | P100, P101],
     [P010, P011 | P110, P111]]

i.e. block index = i, row = j, column within block = k, all 0-based.

Families:

* squares Q1..Q7 (parameterised stochastic solutions of the square
  two-time consistency equation), ROT (rotation by t-s, non-stochastic),
  ZERO and HALF (constant idempotents);
* scalars CANTOR_A/B/C (zero, ratio, and step solutions of the scalar
  equation P[s,t] = P[s,tau] * P[tau,t]);
* cubics M1..M7 plus UNIFORM(m) and TABULATED.

Piecewise families follow the half-open convention: ``s <= t < threshold``
selects the first branch, ``t >= threshold`` the second.

The module evaluates and verifies these listed closed forms only; it
does not search for further solutions of the underlying functional
equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import fnexpr
from .algebra import CubicMatrix, SquareMatrix

__all__ = [
    "ParamFn", "Violation", "FamilyDomainError", "MatrixFamily",
    "M7Spec", "GqDemo", "make_family", "make_m7", "eval_family",
    "validate_domain", "build_m7", "classify_m7_type",
    "negative_example_gq", "FAMILY_IDS",
]

RANGE_TOL = 1e-9


class FamilyDomainError(ValueError):
    """A family was evaluated outside its validity domain."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = tuple(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    s: float
    t: float
    condition: str
    value: float

    def __str__(self) -> str:
        return (f"at (s={self.s:g}, t={self.t:g}): violated {self.condition} "
                f"(value {self.value:.6g})")


class ParamFn:
    """Single-variable time function, built from text or a callable.

    Discrete-domain functions may only be evaluated at nonnegative
    integers (the grid convention for discrete-time families).
    """

    __slots__ = ("_fn", "source", "domain")

    def __init__(self, fn: Callable[[float], float], source: str = "<callable>",
                 domain: str = "continuous"):
        if domain not in ("continuous", "discrete"):
            raise ValueError(f"unknown domain {domain!r}")
        self._fn = fn
        self.source = source
        self.domain = domain

    @classmethod
    def from_expression(cls, text: str, domain: str = "continuous") -> "ParamFn":
        expr = fnexpr.parse(text)
        return cls(lambda t: fnexpr.eval_expr(expr, t), source=text, domain=domain)

    @classmethod
    def constant(cls, value: float, domain: str = "continuous") -> "ParamFn":
        value = float(value)
        return cls(lambda t: value, source=repr(value), domain=domain)

    @classmethod
    def exp_decay(cls, rate: float, domain: str = "continuous") -> "ParamFn":
        """exp(-rate * t); positive and decreasing for rate > 0."""
        rate = float(rate)
        return cls(lambda t: math.exp(-rate * t),
                   source=f"exp(-{rate:g}*t)", domain=domain)

    @classmethod
    def pow_decay(cls, base: float, domain: str = "continuous") -> "ParamFn":
        """base^(-t); positive and decreasing for base > 1."""
        base = float(base)
        if base <= 0:
            raise ValueError(f"decay base must be positive, got {base}")
        return cls(lambda t: base ** (-t),
                   source=f"{base:g}^(-t)", domain=domain)

    def __call__(self, t: float) -> float:
        if self.domain == "discrete":
            if t < 0 or abs(t - round(t)) > 1e-9:
                raise FamilyDomainError([Violation(
                    t, t, "discrete-domain parameter needs integer t >= 0", t)])
        return float(self._fn(t))

    def __repr__(self) -> str:
        return f"ParamFn({self.source!r}, domain={self.domain!r})"


def _check_order(s: float, t: float) -> None:
    if not (0 <= s < t):
        raise ValueError(f"times must satisfy 0 <= s < t, got s={s}, t={t}")


class MatrixFamily:
    """Base two-time family; subclasses fill in ``_value``.

    ``evaluate`` enforces the family's parameter-domain conditions and
    raises FamilyDomainError naming the violated inequality;
    ``validate_domain`` collects the same conditions plus the [0, 1]
    entry-range check as data.
    """

    kind = "cubic"  # or "square" / "scalar"

    def __init__(self, family_id: str, m: int, time_domain: str = "continuous"):
        self.family_id = family_id
        self.m = m
        self.time_domain = time_domain

    # -- evaluation -------------------------------------------------
    def evaluate(self, s: float, t: float):
        _check_order(s, t)
        violations = self.param_violations(s, t)
        if violations:
            raise FamilyDomainError(violations)
        return self._value(s, t)

    def evaluate_unchecked(self, s: float, t: float):
        _check_order(s, t)
        return self._value(s, t)

    def _value(self, s: float, t: float):
        raise NotImplementedError

    # -- validity ---------------------------------------------------
    def param_violations(self, s: float, t: float) -> list[Violation]:
        return []

    def range_violations(self, s: float, t: float, tol: float = RANGE_TOL) -> list[Violation]:
        try:
            value = self._value(s, t)
        except (fnexpr.EvalError, ZeroDivisionError, FamilyDomainError) as exc:
            return [Violation(s, t, f"evaluable entries ({exc})", math.nan)]
        entries = value if isinstance(value, float) else value.entries
        low = float(np.min(entries))
        high = float(np.max(entries))
        out = []
        if low < -tol:
            out.append(Violation(s, t, "entries within [0, 1]", low))
        if high > 1.0 + tol:
            out.append(Violation(s, t, "entries within [0, 1]", high))
        return out

    def describe(self) -> str:
        return self.family_id

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()}>"


def eval_family(fam: MatrixFamily, s: float, t: float):
    """Evaluate ``fam`` at the ordered pair (s, t); see MatrixFamily.evaluate."""
    return fam.evaluate(s, t)


def validate_domain(fam: MatrixFamily, pairs: Iterable[tuple[float, float]]) -> list[Violation]:
    """Collect parameter-domain and entry-range violations over a grid.

    Violations are data, not errors; an empty list means the family is
    a valid stochastic-process generator on the sampled grid.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("grid of time pairs must be nonempty")
    out: list[Violation] = []
    for s, t in pairs:
        _check_order(s, t)
        try:
            param = fam.param_violations(s, t)
        except (fnexpr.EvalError, ZeroDivisionError, FamilyDomainError) as exc:
            param = [Violation(s, t, f"evaluable parameters ({exc})", math.nan)]
        out.extend(param)
        out.extend(fam.range_violations(s, t))
    return out


def _ratio(fn: ParamFn, s: float, t: float, name: str) -> float:
    denom = fn(s)
    if denom == 0.0:
        raise FamilyDomainError([Violation(s, t, f"{name}(s) != 0", 0.0)])
    return fn(t) / denom


# ---------------------------------------------------------------------------
# cubic families (m = 2 unless stated)
# ---------------------------------------------------------------------------

class UniformCubic(MatrixFamily):
    """Constant solution with every entry 1/m^2 (ids M1, M3, UNIFORM)."""

    kind = "cubic"

    def __init__(self, family_id: str = "UNIFORM", m: int = 2,
                 time_domain: str = "continuous"):
        super().__init__(family_id, m, time_domain)

    def _value(self, s, t):
        return CubicMatrix(np.full((self.m,) * 3, 1.0 / self.m ** 2))


class RatioCubicFamily(MatrixFamily):
    """Shared machinery for the ratio-driven cubic families (M2, M4, M5)."""

    kind = "cubic"
    ratio_bound: float = 1.0
    param_name: str = "PHI"

    def __init__(self, family_id: str, fn: ParamFn, time_domain: str):
        super().__init__(family_id, 2, time_domain)
        self.fn = fn

    def ratio(self, s: float, t: float) -> float:
        return _ratio(self.fn, s, t, self.param_name)

    def param_violations(self, s, t):
        denom = self.fn(s)
        if denom == 0.0:
            return [Violation(s, t, f"{self.param_name}(s) != 0", 0.0)]
        r = self.fn(t) / denom
        bound = self.ratio_bound
        if abs(r) > bound + RANGE_TOL:
            cond = (f"-{_fmt_bound(bound)} <= {self.param_name}(t)/{self.param_name}(s)"
                    f" <= {_fmt_bound(bound)}")
            return [Violation(s, t, cond, r)]
        return []

    def describe(self) -> str:
        return f"{self.family_id}({self.param_name}={self.fn.source})"


def _fmt_bound(bound: float) -> str:
    return {1.0: "1", 0.5: "1/2", 1.0 / 3.0: "1/3"}.get(bound, f"{bound:g}")


class M2Family(RatioCubicFamily):
    """f = (ratio + 1)/4 in six entries, 1-3f and 3f-1/2 in the rest.

    Valid iff |ratio| <= 1/3 (equivalently 1/6 <= f <= 1/3), which a
    decreasing discrete-time parameter like 3^(-t) satisfies.
    """

    ratio_bound = 1.0 / 3.0
    param_name = "PHI"

    def __init__(self, fn: ParamFn, time_domain: str = "discrete"):
        super().__init__("M2", fn, time_domain)

    def f(self, s: float, t: float) -> float:
        return (self.ratio(s, t) + 1.0) / 4.0

    def _value(self, s, t):
        return CubicMatrix(m2_entries(self.f(s, t)))


def m2_entries(f: float) -> np.ndarray:
    """Entry layout used by the M2 family for a given f value."""
    e = np.empty((2, 2, 2))
    e[0, 0, 0] = e[0, 0, 1] = e[1, 0, 0] = f
    e[1, 0, 1] = 1.0 - 3.0 * f
    e[0, 1, 0] = e[0, 1, 1] = e[1, 1, 0] = 0.5 - f
    e[1, 1, 1] = 3.0 * f - 0.5
    return e


class M4Family(RatioCubicFamily):
    """All entries 1/4 except (1,0,1) = 1/4 + ratio/2 and (1,1,1) = 1/4 - ratio/2."""

    ratio_bound = 0.5
    param_name = "PSI"

    def __init__(self, fn: ParamFn, time_domain: str = "discrete"):
        super().__init__("M4", fn, time_domain)

    def _value(self, s, t):
        r = self.ratio(s, t)
        e = np.full((2, 2, 2), 0.25)
        e[1, 0, 1] = 0.25 + r / 2.0
        e[1, 1, 1] = 0.25 - r / 2.0
        return CubicMatrix(e)


class M5Family(RatioCubicFamily):
    """Entries depend on the middle index only: g at j=0, 1/2-g at j=1."""

    ratio_bound = 1.0
    param_name = "PHI"

    def __init__(self, fn: ParamFn, time_domain: str = "continuous"):
        super().__init__("M5", fn, time_domain)

    def g(self, s: float, t: float) -> float:
        return (self.ratio(s, t) + 1.0) / 4.0

    def _value(self, s, t):
        g = self.g(s, t)
        e = np.empty((2, 2, 2))
        e[:, 0, :] = g
        e[:, 1, :] = 0.5 - g
        return CubicMatrix(e)


class M6Family(MatrixFamily):
    """Step family: rows (1/2 | 0) while s <= t < a, uniform 1/4 once t >= a."""

    kind = "cubic"

    def __init__(self, a: float, time_domain: str = "continuous"):
        if a <= 0:
            raise ValueError(f"threshold a must be positive, got {a}")
        super().__init__("M6", 2, time_domain)
        self.a = float(a)

    def _value(self, s, t):
        e = np.empty((2, 2, 2))
        if t < self.a:
            e[:, 0, :] = 0.5
            e[:, 1, :] = 0.0
        else:
            e[:] = 0.25
        return CubicMatrix(e)

    def describe(self) -> str:
        return f"M6(A={self.a:g})"


class TabulatedCubic(MatrixFamily):
    """Caller-supplied evaluator (s, t) -> (m, m, m) array."""

    kind = "cubic"

    def __init__(self, evaluator: Callable[[float, float], np.ndarray], m: int,
                 family_id: str = "TABULATED", time_domain: str = "continuous"):
        super().__init__(family_id, m, time_domain)
        self.evaluator = evaluator

    def _value(self, s, t):
        return CubicMatrix(np.asarray(self.evaluator(s, t), dtype=float))


# ---------------------------------------------------------------------------
# square families (all m = 2)
# ---------------------------------------------------------------------------

class SquareFamily(MatrixFamily):
    kind = "square"

    def __init__(self, family_id: str, time_domain: str = "continuous"):
        super().__init__(family_id, 2, time_domain)


class Q1Family(SquareFamily):
    """Columns (g(s), 1-g(s)); left stochastic for g(s) in [0, 1], any g."""

    def __init__(self, g: ParamFn, time_domain: str = "continuous"):
        super().__init__("Q1", time_domain)
        self.g = g

    def param_violations(self, s, t):
        value = self.g(s)
        if not -RANGE_TOL <= value <= 1.0 + RANGE_TOL:
            return [Violation(s, t, "G(s) in [0, 1]", value)]
        return []

    def _value(self, s, t):
        g = self.g(s)
        return SquareMatrix([[g, g], [1.0 - g, 1.0 - g]])

    def describe(self) -> str:
        return f"Q1(G={self.g.source})"


class _PositiveRatioSquare(SquareFamily):
    """Squares driven by a positive decreasing function's ratio."""

    param_name = "PSI"

    def __init__(self, family_id: str, fn: ParamFn, time_domain: str = "continuous"):
        super().__init__(family_id, time_domain)
        self.fn = fn

    def ratio(self, s, t):
        return _ratio(self.fn, s, t, self.param_name)

    def param_violations(self, s, t):
        denom = self.fn(s)
        if denom == 0.0:
            return [Violation(s, t, f"{self.param_name}(s) != 0", 0.0)]
        r = self.fn(t) / denom
        if not 0.0 < r <= 1.0 + RANGE_TOL:
            cond = f"0 < {self.param_name}(t)/{self.param_name}(s) <= 1"
            return [Violation(s, t, cond, r)]
        return []

    def describe(self) -> str:
        return f"{self.family_id}({self.param_name}={self.fn.source})"


class Q2Family(_PositiveRatioSquare):
    """Doubly stochastic (1 +- ratio)/2 pattern."""

    def __init__(self, psi: ParamFn, time_domain: str = "continuous"):
        super().__init__("Q2", psi, time_domain)

    def _value(self, s, t):
        r = self.ratio(s, t)
        return SquareMatrix([[(1 + r) / 2, (1 - r) / 2],
                             [(1 - r) / 2, (1 + r) / 2]])


class Q3Family(SquareFamily):
    """Identity while s <= t < b, then the rank-1 doubly stochastic 1/2 matrix."""

    def __init__(self, b: float, time_domain: str = "continuous"):
        if b <= 0:
            raise ValueError(f"threshold b must be positive, got {b}")
        super().__init__("Q3", time_domain)
        self.b = float(b)

    def _value(self, s, t):
        if t < self.b:
            return SquareMatrix(np.eye(2))
        return SquareMatrix(np.full((2, 2), 0.5))

    def describe(self) -> str:
        return f"Q3(B={self.b:g})"


class Q4Family(_PositiveRatioSquare):
    """Right stochastic [[1, 0], [1-ratio, ratio]]."""

    def __init__(self, psi: ParamFn, time_domain: str = "continuous"):
        super().__init__("Q4", psi, time_domain)

    def _value(self, s, t):
        r = self.ratio(s, t)
        return SquareMatrix([[1.0, 0.0], [1.0 - r, r]])


class Q5Family(SquareFamily):
    """Rows (f(t), 1-f(t)); right stochastic for f(t) in [0, 1], any f."""

    def __init__(self, f: ParamFn, time_domain: str = "continuous"):
        super().__init__("Q5", time_domain)
        self.f = f

    def param_violations(self, s, t):
        value = self.f(t)
        if not -RANGE_TOL <= value <= 1.0 + RANGE_TOL:
            return [Violation(s, t, "F(t) in [0, 1]", value)]
        return []

    def _value(self, s, t):
        f = self.f(t)
        return SquareMatrix([[f, 1.0 - f], [f, 1.0 - f]])

    def describe(self) -> str:
        return f"Q5(F={self.f.source})"


class Q6Family(_PositiveRatioSquare):
    """Two-rate relaxation family; requires 0 < 2*mu < lambda."""

    param_name = "THETA"

    def __init__(self, lam: float, mu: float, theta: ParamFn,
                 time_domain: str = "continuous"):
        if not 0 < 2 * mu < lam:
            raise ValueError(f"parameters must satisfy 0 < 2*MU < LAMBDA, "
                             f"got LAMBDA={lam}, MU={mu}")
        super().__init__("Q6", theta, time_domain)
        self.lam = float(lam)
        self.mu = float(mu)

    def _value(self, s, t):
        r = self.ratio(s, t)
        alpha = (self.lam - 2 * self.mu) / (2 * (self.lam - self.mu))
        beta = self.lam / (2 * (self.lam - self.mu))
        step = 1.0 - r
        return SquareMatrix([[1 - alpha * step, alpha * step],
                             [beta * step, 1 - beta * step]])

    def describe(self) -> str:
        return (f"Q6(LAMBDA={self.lam:g}, MU={self.mu:g}, "
                f"THETA={self.fn.source})")


class Q7Family(SquareFamily):
    """Identity while s <= t < a, then rows (g(t), 1-g(t))."""

    def __init__(self, a: float, g: ParamFn, time_domain: str = "continuous"):
        if a <= 0:
            raise ValueError(f"threshold a must be positive, got {a}")
        super().__init__("Q7", time_domain)
        self.a = float(a)
        self.g = g

    def param_violations(self, s, t):
        if t < self.a:
            return []
        value = self.g(t)
        if not -RANGE_TOL <= value <= 1.0 + RANGE_TOL:
            return [Violation(s, t, "G(t) in [0, 1]", value)]
        return []

    def _value(self, s, t):
        if t < self.a:
            return SquareMatrix(np.eye(2))
        g = self.g(t)
        return SquareMatrix([[g, 1.0 - g], [g, 1.0 - g]])

    def describe(self) -> str:
        return f"Q7(A={self.a:g}, G={self.g.source})"


class RotationFamily(SquareFamily):
    """Rotation by angle t-s; solves the square equation, non-stochastic."""

    def __init__(self, time_domain: str = "continuous"):
        super().__init__("ROT", time_domain)

    def _value(self, s, t):
        d = t - s
        return SquareMatrix([[math.cos(d), math.sin(d)],
                             [-math.sin(d), math.cos(d)]])


class ZeroSquare(SquareFamily):
    """Constant zero matrix (trivial solution)."""

    def __init__(self, time_domain: str = "continuous"):
        super().__init__("ZERO", time_domain)

    def _value(self, s, t):
        return SquareMatrix(np.zeros((2, 2)))


class HalfSquare(SquareFamily):
    """Constant doubly stochastic idempotent with every entry 1/2."""

    def __init__(self, time_domain: str = "continuous"):
        super().__init__("HALF", time_domain)

    def _value(self, s, t):
        return SquareMatrix(np.full((2, 2), 0.5))


class TabulatedSquare(SquareFamily):
    def __init__(self, evaluator: Callable[[float, float], np.ndarray],
                 family_id: str = "TABULATED", time_domain: str = "continuous"):
        super().__init__(family_id, time_domain)
        self.evaluator = evaluator

    def _value(self, s, t):
        return SquareMatrix(np.asarray(self.evaluator(s, t), dtype=float))


# ---------------------------------------------------------------------------
# scalar families (m = 1)
# ---------------------------------------------------------------------------

class ScalarFamily(MatrixFamily):
    kind = "scalar"

    def __init__(self, family_id: str, time_domain: str = "continuous"):
        super().__init__(family_id, 1, time_domain)


class CantorZero(ScalarFamily):
    def __init__(self, time_domain: str = "continuous"):
        super().__init__("CANTOR_A", time_domain)

    def _value(self, s, t):
        return 0.0


class CantorRatio(ScalarFamily):
    """P[s,t] = PHI(t)/PHI(s) for any PHI that never vanishes."""

    def __init__(self, phi: ParamFn, time_domain: str = "continuous"):
        super().__init__("CANTOR_B", time_domain)
        self.phi = phi

    def param_violations(self, s, t):
        if self.phi(s) == 0.0:
            return [Violation(s, t, "PHI(s) != 0", 0.0)]
        return []

    def _value(self, s, t):
        return _ratio(self.phi, s, t, "PHI")

    def describe(self) -> str:
        return f"CANTOR_B(PHI={self.phi.source})"


class CantorStep(ScalarFamily):
    """1 while s <= t < c, 0 once t >= c."""

    def __init__(self, c: float, time_domain: str = "continuous"):
        if c <= 0:
            raise ValueError(f"threshold c must be positive, got {c}")
        super().__init__("CANTOR_C", time_domain)
        self.c = float(c)

    def _value(self, s, t):
        return 1.0 if t < self.c else 0.0

    def describe(self) -> str:
        return f"CANTOR_C(C={self.c:g})"


# ---------------------------------------------------------------------------
# the max-operation slice construction (M7)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class M7Spec:
    """Pair of m=2 square-equation solutions feeding the slice construction.

    At every evaluated pair the entries of C and of B - C must lie in
    [0, 1]; that makes the built cubic a valid nonnegative kernel.
    """

    b_family: MatrixFamily
    c_family: MatrixFamily

    def __post_init__(self):
        for role, fam in (("B", self.b_family), ("C", self.c_family)):
            if fam.kind != "square" or fam.m != 2:
                raise ValueError(f"{role} family must be an m=2 square family, "
                                 f"got {fam.describe()}")


def _m7_range_violations(b: np.ndarray, c: np.ndarray, s: float, t: float,
                         tol: float = RANGE_TOL) -> list[Violation]:
    out = []
    for label, block in (("C", c), ("B - C", b - c)):
        low, high = float(block.min()), float(block.max())
        if low < -tol:
            out.append(Violation(s, t, f"{label} entries within [0, 1]", low))
        if high > 1.0 + tol:
            out.append(Violation(s, t, f"{label} entries within [0, 1]", high))
    return out


def _m7_entries(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    e = np.empty((2, 2, 2))
    e[:, 0, :] = c
    e[:, 1, :] = b - c
    return e


def build_m7(spec: M7Spec, s: float, t: float) -> CubicMatrix:
    """Cubic with first middle slice C and middle marginal B.

    Layout: entry (i, 0, j) = C[i, j], entry (i, 1, j) = B[i, j] - C[i, j].
    Rejects pairs where C or B - C leaves [0, 1], naming the witness.
    """
    _check_order(s, t)
    b = spec.b_family.evaluate(s, t).entries
    c = spec.c_family.evaluate(s, t).entries
    violations = _m7_range_violations(b, c, s, t)
    if violations:
        raise FamilyDomainError(violations)
    return CubicMatrix(_m7_entries(b, c))


class M7Family(MatrixFamily):
    """Two-slice cubic family assembled from an M7Spec."""

    kind = "cubic"

    def __init__(self, spec: M7Spec, time_domain: Optional[str] = None):
        if time_domain is None:
            time_domain = spec.b_family.time_domain
        super().__init__("M7", 2, time_domain)
        self.spec = spec

    def param_violations(self, s, t):
        out = []
        out.extend(self.spec.b_family.param_violations(s, t))
        out.extend(self.spec.c_family.param_violations(s, t))
        if not out:
            b = self.spec.b_family.evaluate_unchecked(s, t).entries
            c = self.spec.c_family.evaluate_unchecked(s, t).entries
            out.extend(_m7_range_violations(b, c, s, t))
        return out

    def _value(self, s, t):
        b = self.spec.b_family.evaluate_unchecked(s, t).entries
        c = self.spec.c_family.evaluate_unchecked(s, t).entries
        return CubicMatrix(_m7_entries(b, c))

    def describe(self) -> str:
        return (f"M7(B={self.spec.b_family.describe()}, "
                f"C={self.spec.c_family.describe()})")


_M7_TYPE_TAGS = ("12|max", "13|max", "23|max", "1|max", "3|max")


def classify_m7_type(spec: M7Spec, pairs: Iterable[tuple[float, float]],
                     tol: float = RANGE_TOL) -> set:
    """Process types supported by an M7Spec at every pair of the grid.

    Conditions per type (checked at all pairs):
      12|max  B left stochastic
      13|max  B nonnegative, total 2; C nonnegative, total 1
      23|max  B right stochastic
      1|max   B columns each sum 2; C left stochastic
      3|max   B rows each sum 2; C right stochastic
    The 2|max type would need every B entry identically 1, which no
    solution of the square equation admits; it is never returned.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("grid of time pairs must be nonempty")
    alive = set(_M7_TYPE_TAGS)
    for s, t in pairs:
        _check_order(s, t)
        b = spec.b_family.evaluate(s, t).entries
        c = spec.c_family.evaluate(s, t).entries
        if _m7_range_violations(b, c, s, t, tol):
            raise FamilyDomainError(_m7_range_violations(b, c, s, t, tol))
        b_nonneg = b.min() >= -tol
        c_nonneg = c.min() >= -tol

        def eq(x, target):
            return bool(np.max(np.abs(np.asarray(x) - target)) <= tol)

        conditions = {
            "12|max": b_nonneg and eq(b.sum(axis=0), 1.0),
            "13|max": b_nonneg and c_nonneg and eq(b.sum(), 2.0) and eq(c.sum(), 1.0),
            "23|max": b_nonneg and eq(b.sum(axis=1), 1.0),
            "1|max": b_nonneg and c_nonneg and eq(b.sum(axis=0), 2.0)
                     and eq(c.sum(axis=0), 1.0),
            "3|max": b_nonneg and c_nonneg and eq(b.sum(axis=1), 2.0)
                     and eq(c.sum(axis=1), 1.0),
        }
        alive = {tag for tag in alive if conditions[tag]}
        if not alive:
            break
    return alive


# ---------------------------------------------------------------------------
# the left-stochastic counterexample record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GqDemo:
    """Why Q = [[0,0],[1,1]] admits no matching cubic family.

    The scalar equation g(s,t) = 4 g(s,tau) g(tau,t) - g(s,tau) induced
    by this Q has the constant solution g = 1/2 (residual 0), yet the
    marginal constraint P000 + P010 = q00 = 0 forces P000 = 0, which
    contradicts P000 = g = 1/2.
    """

    q: SquareMatrix
    q_kce_residual: float
    g_value: float
    g_equation_residual: float
    required_p000: float
    assumed_p000: float
    contradiction: bool


def negative_example_gq() -> GqDemo:
    q = SquareMatrix([[0.0, 0.0], [1.0, 1.0]])
    q_res = float(np.abs((q @ q).entries - q.entries).max())
    g = 0.5
    g_res = g - (4.0 * g * g - g)
    return GqDemo(
        q=q,
        q_kce_residual=q_res,
        g_value=g,
        g_equation_residual=g_res,
        required_p000=0.0,
        assumed_p000=g,
        contradiction=abs(0.0 - g) > 0,
    )


# ---------------------------------------------------------------------------
# construction from textual parameters (CLI / config path)
# ---------------------------------------------------------------------------

ParamValue = Union[str, float, int, ParamFn, Callable[[float], float]]

# (function params with default expressions, scalar params with defaults)
_FAMILY_PARAMS: dict[str, tuple[dict[str, str], dict[str, float]]] = {
    "M1": ({}, {}),
    "M2": ({"PHI": "3^(-t)"}, {}),
    "M3": ({}, {}),
    "M4": ({"PSI": "2^(-t)"}, {}),
    "M5": ({"PHI": "exp(-t)"}, {}),
    "M6": ({}, {"A": 2.0}),
    "UNIFORM": ({}, {"M": 2.0}),
    "Q1": ({"G": "0.3"}, {}),
    "Q2": ({"PSI": "exp(-t)"}, {}),
    "Q3": ({}, {"B": 2.0}),
    "Q4": ({"PSI": "exp(-t)"}, {}),
    "Q5": ({"F": "1/2 + cos(t)/4"}, {}),
    "Q6": ({"THETA": "exp(-t)"}, {"LAMBDA": 3.0, "MU": 1.0}),
    "Q7": ({"G": "1/2 + cos(t)/4"}, {"A": 2.0}),
    "ROT": ({}, {}),
    "ZERO": ({}, {}),
    "HALF": ({}, {}),
    "CANTOR_A": ({}, {}),
    "CANTOR_B": ({"PHI": "exp(-t)"}, {}),
    "CANTOR_C": ({}, {"C": 2.0}),
}

_DISCRETE_DEFAULT = {"M2", "M4"}

FAMILY_IDS = tuple(sorted(_FAMILY_PARAMS)) + ("M7", "TABULATED")


def _expr_uses_t(expr: fnexpr.Expr) -> bool:
    if isinstance(expr, fnexpr.Var):
        return True
    if isinstance(expr, fnexpr.Neg):
        return _expr_uses_t(expr.operand)
    if isinstance(expr, fnexpr.BinOp):
        return _expr_uses_t(expr.left) or _expr_uses_t(expr.right)
    if isinstance(expr, fnexpr.Call):
        return _expr_uses_t(expr.arg)
    return False


def _as_scalar(name: str, value: ParamValue) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        expr = fnexpr.parse(value)
        if _expr_uses_t(expr):
            raise ValueError(f"parameter {name} must be a constant, got {value!r}")
        return fnexpr.eval_expr(expr, 0.0)
    raise ValueError(f"parameter {name} must be a number, got {value!r}")


def _as_paramfn(name: str, value: ParamValue, domain: str) -> ParamFn:
    if isinstance(value, ParamFn):
        return ParamFn(value._fn, source=value.source, domain=domain)
    if isinstance(value, str):
        return ParamFn.from_expression(value, domain=domain)
    if isinstance(value, (int, float)):
        return ParamFn.constant(value, domain=domain)
    if callable(value):
        return ParamFn(value, domain=domain)
    raise ValueError(f"parameter {name} must be an expression, number or "
                     f"callable, got {value!r}")


def make_family(family_id: str, params: Optional[dict] = None, *,
                m: Optional[int] = None,
                time_domain: Optional[str] = None) -> MatrixFamily:
    """Build a named family from textual/numeric parameters.

    ``params`` maps parameter names (case-insensitive) to expression
    strings in t, numbers, ParamFns, or callables.  Unknown parameter
    names are rejected.  M7 is assembled with :func:`make_m7` instead.
    """
    fid = family_id.upper()
    if fid == "M7":
        raise ValueError("build M7 via make_m7(b_family, c_family)")
    if fid not in _FAMILY_PARAMS:
        raise ValueError(f"unknown family {family_id!r}; known ids: "
                         f"{', '.join(FAMILY_IDS)}")
    fn_defaults, scalar_defaults = _FAMILY_PARAMS[fid]
    if time_domain is None:
        time_domain = "discrete" if fid in _DISCRETE_DEFAULT else "continuous"

    given = {str(k).upper(): v for k, v in (params or {}).items()}
    unknown = set(given) - set(fn_defaults) - set(scalar_defaults)
    if unknown:
        raise ValueError(f"family {fid} does not take parameter(s) "
                         f"{', '.join(sorted(unknown))}")
    fns = {name: _as_paramfn(name, given.get(name, default), time_domain)
           for name, default in fn_defaults.items()}
    scalars = {name: _as_scalar(name, given[name]) if name in given else default
               for name, default in scalar_defaults.items()}

    if fid == "M1":
        return UniformCubic("M1", 2, time_domain)
    if fid == "M3":
        return UniformCubic("M3", 2, time_domain)
    if fid == "UNIFORM":
        dim = m if m is not None else int(scalars["M"])
        if dim < 1:
            raise ValueError(f"UNIFORM dimension must be >= 1, got {dim}")
        return UniformCubic("UNIFORM", dim, time_domain)
    if fid == "M2":
        return M2Family(fns["PHI"], time_domain)
    if fid == "M4":
        return M4Family(fns["PSI"], time_domain)
    if fid == "M5":
        return M5Family(fns["PHI"], time_domain)
    if fid == "M6":
        return M6Family(scalars["A"], time_domain)
    if fid == "Q1":
        return Q1Family(fns["G"], time_domain)
    if fid == "Q2":
        return Q2Family(fns["PSI"], time_domain)
    if fid == "Q3":
        return Q3Family(scalars["B"], time_domain)
    if fid == "Q4":
        return Q4Family(fns["PSI"], time_domain)
    if fid == "Q5":
        return Q5Family(fns["F"], time_domain)
    if fid == "Q6":
        return Q6Family(scalars["LAMBDA"], scalars["MU"], fns["THETA"], time_domain)
    if fid == "Q7":
        return Q7Family(scalars["A"], fns["G"], time_domain)
    if fid == "ROT":
        return RotationFamily(time_domain)
    if fid == "ZERO":
        return ZeroSquare(time_domain)
    if fid == "HALF":
        return HalfSquare(time_domain)
    if fid == "CANTOR_A":
        return CantorZero(time_domain)
    if fid == "CANTOR_B":
        return CantorRatio(fns["PHI"], time_domain)
    if fid == "CANTOR_C":
        return CantorStep(scalars["C"], time_domain)
    raise AssertionError(fid)


def make_m7(b_family: MatrixFamily, c_family: MatrixFamily,
            time_domain: Optional[str] = None) -> M7Family:
    """Assemble the slice-construction family from two square families."""
    return M7Family(M7Spec(b_family, c_family), time_domain)


def family_param_names(family_id: str) -> frozenset:
    """Parameter names a family accepts (uppercase)."""
    fid = family_id.upper()
    if fid not in _FAMILY_PARAMS:
        return frozenset()
    fn_defaults, scalar_defaults = _FAMILY_PARAMS[fid]
    return frozenset(fn_defaults) | frozenset(scalar_defaults)
