import json
import math
from pathlib import Path

import numpy as np
import pytest

from qsproc.algebra import (BinaryOp, CubicMatrix, SquareMatrix, basis,
                            middle_marginal, op_product)
from qsproc.families import make_family
from qsproc.stochasticity import StochKind, check_kind, classify, square_class

FIXTURES = Path(__file__).parent / "fixtures"

_NORMALISE_AXES = {
    StochKind.S12: (0, 1),
    StochKind.S13: (0, 2),
    StochKind.S23: (1, 2),
    StochKind.S1: (0,),
    StochKind.S2: (1,),
    StochKind.S3: (2,),
}


def random_of_kind(rng, m, kind):
    x = rng.random((m, m, m)) + 0.05
    return CubicMatrix(x / x.sum(axis=_NORMALISE_AXES[kind], keepdims=True))


def random_twice_stochastic(rng, m):
    """Alternate scaling until sum_i = 1/m per (j,k) and sum_{jk} = 1 per i."""
    x = rng.random((m, m, m)) + 0.1
    for _ in range(500):
        x = x / (m * x.sum(axis=0, keepdims=True))
        x = x / x.sum(axis=(1, 2), keepdims=True)
        col = np.abs(x.sum(axis=0) - 1.0 / m).max()
        row = np.abs(x.sum(axis=(1, 2)) - 1.0).max()
        if max(col, row) < 1e-14:
            break
    assert max(col, row) < 1e-13, "scaling failed to converge"
    return CubicMatrix(x)


# -- check_kind examples --------------------------------------------------

def test_uniform_cubic_kinds():
    uniform = CubicMatrix(np.full((2, 2, 2), 0.25))
    for kind in (StochKind.S12, StochKind.S13, StochKind.S23, StochKind.TWICE):
        assert check_kind(uniform, kind).holds
    for kind in (StochKind.S1, StochKind.S2, StochKind.S3):
        result = check_kind(uniform, kind)
        assert not result.holds
        assert result.max_violation == pytest.approx(0.5)  # sums are 1/2


def test_m1_is_13_stochastic():
    m1 = make_family("M1").evaluate(0.0, 1.0)
    assert check_kind(m1, StochKind.S13).holds


def test_m6_first_branch_is_12_stochastic():
    m6 = make_family("M6", {"A": 2}).evaluate(0.0, 1.0)
    result = check_kind(m6, StochKind.S12)
    assert result.holds  # column sums over (i,j): 1/2 + 0 + 1/2 + 0 = 1
    assert not check_kind(m6, StochKind.S13).holds


def test_tolerance_must_be_positive():
    uniform = CubicMatrix(np.full((2, 2, 2), 0.25))
    with pytest.raises(ValueError):
        check_kind(uniform, StochKind.S12, tol=0.0)


# -- classify ---------------------------------------------------------------

def test_classify_m3_all_pair_kinds():
    m3 = make_family("M3").evaluate(0.0, 1.0)
    report = classify(m3)
    assert report.kinds == frozenset({StochKind.S12, StochKind.S13,
                                      StochKind.S23, StochKind.TWICE})


def test_classify_basis_holds_nothing():
    report = classify(basis(2, 0, 0, 0))
    assert report.kinds == frozenset()
    # the k=1 slice sums to 0, so the (1,2) violation is exactly 1
    assert report.violations[StochKind.S12] == pytest.approx(1.0)


def test_classify_normalised_s23():
    rng = np.random.default_rng(11)
    a = random_of_kind(rng, 3, StochKind.S23)
    report = classify(a)
    assert StochKind.S23 in report.kinds


def test_classify_reports_all_violations():
    report = classify(CubicMatrix(np.full((2, 2, 2), 0.25)))
    assert set(report.violations) == set(StochKind)


# -- square_class -----------------------------------------------------------

def test_square_class_half_matrix():
    sc = square_class(SquareMatrix([[0.5, 0.5], [0.5, 0.5]]))
    assert sc.left and sc.right and sc.doubly
    assert sc.total_sum == pytest.approx(2.0)


def test_square_class_q1_left_only():
    q1 = make_family("Q1", {"G": 0.3}).evaluate(0.0, 1.0)
    sc = square_class(q1)
    assert sc.left and not sc.right and not sc.doubly


def test_square_class_rotation_not_stochastic():
    rot = make_family("ROT").evaluate(0.0, math.pi / 4)
    sc = square_class(rot)
    assert not sc.left and not sc.right
    assert sc.min_entry < 0  # -sin(pi/4)


# -- marginal correspondences ----------------------------------------------

def _square_side(kind, q, tol):
    sc = square_class(q, tol)
    entries = q.entries
    nonneg = entries.min() >= -tol
    if kind is StochKind.S12:
        return sc.left
    if kind is StochKind.S23:
        return sc.right
    if kind is StochKind.S13:
        return nonneg and abs(sc.total_sum - q.m) <= tol * q.m
    if kind is StochKind.S1:
        return nonneg and max(abs(v - q.m) for v in sc.col_sums) <= tol * q.m
    if kind is StochKind.S3:
        return nonneg and max(abs(v - q.m) for v in sc.row_sums) <= tol * q.m
    if kind is StochKind.S2:
        return nonneg and np.abs(entries - 1.0).max() <= tol
    raise AssertionError(kind)


@pytest.mark.parametrize("kind", [StochKind.S12, StochKind.S13, StochKind.S23,
                                  StochKind.S1, StochKind.S2, StochKind.S3])
def test_marginal_correspondence_on_constructed(kind):
    rng = np.random.default_rng(12)
    for m in (2, 3, 4):
        for _ in range(10):
            a = random_of_kind(rng, m, kind)
            assert check_kind(a, kind, 1e-9).holds
            assert _square_side(kind, middle_marginal(a), 1e-9)


@pytest.mark.parametrize("kind", [StochKind.S12, StochKind.S13, StochKind.S23,
                                  StochKind.S1, StochKind.S2, StochKind.S3])
def test_marginal_correspondence_iff_on_random(kind):
    """For nonnegative cubics the cubic-side check and the square-side
    property agree in both directions (generic randoms satisfy neither)."""
    rng = np.random.default_rng(13)
    for m in (2, 3):
        for _ in range(25):
            a = CubicMatrix(rng.random((m, m, m)))
            cubic_side = check_kind(a, kind, 1e-9).holds
            assert cubic_side == _square_side(kind, middle_marginal(a), 1e-9)


# -- semigroup closure -------------------------------------------------------

@pytest.mark.parametrize("kind", [StochKind.S12, StochKind.S23])
def test_pair_kind_closure_under_mod(kind):
    rng = np.random.default_rng(14)
    for m in (2, 3, 4):
        op = BinaryOp.mod(m)
        for _ in range(30):
            a = random_of_kind(rng, m, kind)
            b = random_of_kind(rng, m, kind)
            product = op_product(a, b, op)
            assert check_kind(product, kind, 1e-12).holds


def test_twice_stochastic_closure_under_mod():
    rng = np.random.default_rng(15)
    for m in (2, 3, 4):
        op = BinaryOp.mod(m)
        for _ in range(20):
            a = random_twice_stochastic(rng, m)
            b = random_twice_stochastic(rng, m)
            product = op_product(a, b, op)
            assert check_kind(product, StochKind.TWICE, 1e-12).holds


@pytest.mark.parametrize("kind", [StochKind.S12, StochKind.S23, StochKind.TWICE])
def test_convexity_of_classes(kind):
    rng = np.random.default_rng(16)
    make = random_twice_stochastic if kind is StochKind.TWICE \
        else lambda r, m: random_of_kind(r, m, kind)
    for m in (2, 3):
        for lam in (0.0, 0.25, 0.8, 1.0):
            a = make(rng, m)
            b = make(rng, m)
            mix = lam * a + (1.0 - lam) * b
            assert check_kind(mix, kind, 1e-12).holds


def test_one_three_nonclosure_fixture():
    payload = json.loads((FIXTURES / "one_three_nonclosure.json").read_text())
    a = CubicMatrix(np.asarray(payload["a_entries"]))
    b = CubicMatrix(np.asarray(payload["b_entries"]))
    assert check_kind(a, StochKind.S13, 1e-12).holds
    assert check_kind(b, StochKind.S13, 1e-12).holds
    product = op_product(a, b, BinaryOp.mod(2))
    result = check_kind(product, StochKind.S13, 1e-9)
    assert not result.holds
    assert result.max_violation >= 0.5


def test_one_three_nonclosure_found_by_search():
    rng = np.random.default_rng(17)
    op = BinaryOp.mod(2)
    found = False
    for _ in range(200):
        a = random_of_kind(rng, 2, StochKind.S13)
        b = random_of_kind(rng, 2, StochKind.S13)
        product = op_product(a, b, op)
        if check_kind(product, StochKind.S13, 1e-9).max_violation > 1e-6:
            found = True
            break
    assert found
