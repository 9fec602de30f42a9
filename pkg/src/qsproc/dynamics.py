"""Distribution dynamics on the simplex driven by a two-time family.

Two update rules:

* ``step_quadratic`` (pair interaction): x'[k] = sum_{i,j} P[i,j,k] x[i] x[j];
  requires a 3-stochastic kernel so the result stays on the simplex.
* ``step_split`` (particle splitting): x'[k] = (1/2) sum_{i,j}
  (P[k,i,j] + P[i,k,j]) x[j]; requires a (1,2)-stochastic kernel.
  Index-permuted variants cover (1,3)- and (2,3)-stochastic kernels and
  are selected automatically from the kernel's detected kind.

Trajectories use the fixed-start convention: each sample is one
transition x(s) -> x(t) through M[s, t].  A chained mode (stepping
through consecutive pairs) is also available; the two generally differ
because the two-time consistency equation composes kernels, not the
linearised step maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import CubicMatrix
from .families import MatrixFamily
from .stochasticity import StochKind, check_kind

__all__ = [
    "Distribution", "Trajectory", "LimitReport", "StochasticityError",
    "quadratic_map", "split_kernel", "step_quadratic", "step_split",
    "trajectory", "closed_form", "m7_quadratic_form", "limit_estimate",
]

STEP_TOL = 1e-9
CLAMP = 1e-12


class StochasticityError(ValueError):
    """A step was attempted with a kernel lacking the required kind."""

    def __init__(self, kind: StochKind, violation: float,
                 pair: Optional[tuple] = None):
        self.kind = kind
        self.violation = violation
        self.pair = pair
        at = f" at pair (s={pair[0]:g}, t={pair[1]:g})" if pair else ""
        super().__init__(f"kernel is not ({kind.value})-stochastic{at}: "
                         f"worst violation {violation:.3e}")


@dataclass(frozen=True, eq=False)
class Distribution:
    """Point of the simplex: nonnegative entries summing to 1.

    Entries within -1e-12 of zero are clamped to 0 and the vector is
    renormalised; anything worse is an error (it signals a
    non-stochastic kernel, not roundoff).
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ValueError(f"distribution needs a 1-d vector, got shape {probs.shape}")
        low = float(probs.min())
        if low < -CLAMP:
            raise ValueError(f"negative probability {low:.3e} exceeds the "
                             f"roundoff clamp {CLAMP:g}")
        probs = np.clip(probs, 0.0, None)
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def m(self) -> int:
        return self.probs.size

    def allclose(self, other: "Distribution", tol: float = 1e-12) -> bool:
        return bool(np.abs(self.probs - other.probs).max() <= tol)

    def __iter__(self):
        return iter(self.probs)


@dataclass(frozen=True)
class Trajectory:
    start_time: float
    samples: tuple  # ((t, Distribution), ...)

    def __post_init__(self):
        times = [t for t, _ in self.samples]
        if any(t <= self.start_time for t in times):
            raise ValueError("sample times must exceed the start time")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")

    @property
    def times(self) -> tuple:
        return tuple(t for t, _ in self.samples)

    @property
    def states(self) -> tuple:
        return tuple(d for _, d in self.samples)


def quadratic_map(p: CubicMatrix, x: Distribution) -> np.ndarray:
    """Raw interaction update sum_{i,j} P[i,j,k] x[i] x[j] (no gating)."""
    if p.m != x.m:
        raise ValueError(f"dimension mismatch: kernel {p.m} vs state {x.m}")
    return np.einsum("ijk,i,j->k", p.entries, x.probs, x.probs)


def step_quadratic(p: CubicMatrix, x: Distribution,
                   tol: float = STEP_TOL) -> Distribution:
    """Pair-interaction step; rejects kernels that are not 3-stochastic."""
    kc = check_kind(p, StochKind.S3, tol)
    if not kc.holds:
        raise StochasticityError(StochKind.S3, kc.max_violation)
    return Distribution(quadratic_map(p, x))


_SPLIT_KINDS = (StochKind.S12, StochKind.S13, StochKind.S23)


def split_kernel(p: CubicMatrix, kind: StochKind = StochKind.S12) -> np.ndarray:
    """Column-stochastic linear map of the splitting update for one kind.

    The source index is the one missing from the offspring pair: third
    for (1,2), middle for (1,3), first for (2,3).
    """
    e = p.entries
    if kind is StochKind.S12:
        return 0.5 * (e.sum(axis=1) + e.sum(axis=0))
    if kind is StochKind.S13:
        return 0.5 * (e.sum(axis=2) + e.sum(axis=0).T)
    if kind is StochKind.S23:
        return 0.5 * (e.sum(axis=2).T + e.sum(axis=1).T)
    raise ValueError(f"split step applies to kinds (1,2), (1,3), (2,3); got {kind}")


def step_split(p: CubicMatrix, x: Distribution,
               kind: Optional[StochKind] = None,
               tol: float = STEP_TOL) -> Distribution:
    """Splitting step; ``kind=None`` picks the first kind the kernel has
    (preferring (1,2), then (1,3), then (2,3))."""
    if p.m != x.m:
        raise ValueError(f"dimension mismatch: kernel {p.m} vs state {x.m}")
    if kind is None:
        checks = {k: check_kind(p, k, tol) for k in _SPLIT_KINDS}
        kind = next((k for k in _SPLIT_KINDS if checks[k].holds), None)
        if kind is None:
            nearest = min(_SPLIT_KINDS, key=lambda k: checks[k].max_violation)
            raise StochasticityError(nearest, checks[nearest].max_violation)
    else:
        if kind not in _SPLIT_KINDS:
            raise ValueError(f"split step applies to kinds (1,2), (1,3), (2,3); "
                             f"got {kind}")
        kc = check_kind(p, kind, tol)
        if not kc.holds:
            raise StochasticityError(kind, kc.max_violation)
    return Distribution(split_kernel(p, kind) @ x.probs)


def trajectory(fam: MatrixFamily, mode: str, x0: Distribution, s: float,
               times: Sequence[float], *, chained: bool = False,
               kind: Optional[StochKind] = None,
               tol: float = STEP_TOL) -> Trajectory:
    """Evolve ``x0`` from start time ``s`` through the family.

    Fixed-start (default): sample k is one transition through
    M[s, times[k]].  Chained: transitions through consecutive pairs.
    """
    if mode not in ("quadratic", "split"):
        raise ValueError(f"mode must be 'quadratic' or 'split', got {mode!r}")
    times = [float(t) for t in times]
    if not times:
        raise ValueError("need at least one sample time")
    samples = []
    state = x0
    prev = s
    for t in times:
        pair = (s, t) if not chained else (prev, t)
        kernel = fam.evaluate(*pair)
        source = x0 if not chained else state
        try:
            if mode == "quadratic":
                state = step_quadratic(kernel, source, tol)
            else:
                state = step_split(kernel, source, kind=kind, tol=tol)
        except StochasticityError as exc:
            raise StochasticityError(exc.kind, exc.violation, pair) from None
        samples.append((t, state))
        prev = t
    return Trajectory(start_time=s, samples=tuple(samples))


def closed_form(fam: MatrixFamily, x: Distribution, s: float,
                t: float) -> Distribution:
    """Direct evaluation of the per-family closed-form update.

    Independent of step_split/step_quadratic; used as a cross-check
    oracle.  Known families: M1..M7.
    """
    fid = fam.family_id
    if fid in ("M1", "M3"):
        return Distribution([0.5, 0.5])
    if fid == "M2":
        rho = fam.ratio(s, t)
        c = rho / 4.0
        x0, x1 = x.probs
        return Distribution([(0.5 + c) * x0 + (0.5 - c) * x1,
                             (0.5 - c) * x0 + (0.5 + c) * x1])
    if fid == "M4":
        r = fam.ratio(s, t)
        x0, x1 = x.probs
        return Distribution([0.5 * x0 + (0.5 + r / 4.0) * x1,
                             0.5 * x0 + (0.5 - r / 4.0) * x1])
    if fid == "M5":
        r = fam.ratio(s, t)
        return Distribution([0.5 + r / 4.0, 0.5 - r / 4.0])
    if fid == "M6":
        return Distribution([0.75, 0.25] if t < fam.a else [0.5, 0.5])
    if fid == "M7":
        # lands on the simplex only when C and B - C are right stochastic
        return Distribution(m7_quadratic_form(fam.spec, x, s, t))
    raise ValueError(f"no closed form for family {fid!r}")


def m7_quadratic_form(spec, x: Distribution, s: float, t: float) -> np.ndarray:
    """Raw pair-interaction polynomial of the slice construction:
    y[k] = C[0,k] x0^2 + (B[0,k] - C[0,k] + C[1,k]) x0 x1 + (B[1,k] - C[1,k]) x1^2.
    """
    b = spec.b_family.evaluate(s, t).entries
    c = spec.c_family.evaluate(s, t).entries
    x0, x1 = x.probs
    return np.array([
        c[0, k] * x0 ** 2 + (b[0, k] - c[0, k] + c[1, k]) * x0 * x1
        + (b[1, k] - c[1, k]) * x1 ** 2
        for k in range(2)])


@dataclass(frozen=True)
class LimitReport:
    """Tail behaviour of the ratio-driven update.

    ``omega`` is the estimated limit of PHI(t)/(4 PHI(s)); it is None
    when the tail is not Cauchy (divergent).  A limit distribution is
    reported only when the estimate converges inside the admissible
    band [-1/12, 1/12].
    """

    omega: Optional[float]
    converged: bool
    admissible: Optional[bool]
    limit_distribution: Optional[Distribution]
    estimates: tuple

    @property
    def omega_estimate(self):
        return self.omega if self.converged else "divergent"


def limit_estimate(fam: MatrixFamily, s: float, horizon: Sequence[float],
                   x_s: Distribution, *, cauchy_tol: float = 1e-9) -> LimitReport:
    """Estimate the limiting distribution of the M2 update as t - s grows."""
    if fam.family_id != "M2":
        raise ValueError(f"limit estimation needs the ratio-driven M2 family, "
                         f"got {fam.family_id}")
    horizon = [float(t) for t in horizon]
    if len(horizon) < 3 or any(b <= a for a, b in zip(horizon, horizon[1:])):
        raise ValueError("horizon must be at least 3 strictly increasing times")
    if any(t <= s for t in horizon):
        raise ValueError("horizon times must exceed the start time")
    spans = [t - s for t in horizon]
    if max(spans) < 10 * min(spans):
        raise ValueError("horizon must span at least a decade of t - s")
    estimates = tuple(fam.ratio(s, t) / 4.0 for t in horizon)
    tail = estimates[-min(5, len(estimates) - 1):]
    diffs = [abs(b - a) for a, b in zip(tail, tail[1:])]
    converged = all(d <= cauchy_tol for d in diffs)
    if not converged:
        return LimitReport(omega=None, converged=False, admissible=None,
                           limit_distribution=None, estimates=estimates)
    omega = estimates[-1]
    admissible = abs(omega) <= 1.0 / 12.0 + 1e-12
    limit = None
    if admissible:
        x0, x1 = x_s.probs
        limit = Distribution([(0.5 + omega) * x0 + (0.5 - omega) * x1,
                              (0.5 - omega) * x0 + (0.5 + omega) * x1])
    return LimitReport(omega=omega, converged=True, admissible=admissible,
                       limit_distribution=limit, estimates=estimates)
