import math

import numpy as np
import pytest

from qsproc.algebra import SquareMatrix, first_slice, middle_marginal
from qsproc.families import (FamilyDomainError, M7Spec, ParamFn,
                             TabulatedCubic, TabulatedSquare, build_m7,
                             classify_m7_type, eval_family, m2_entries,
                             make_family, make_m7, negative_example_gq,
                             validate_domain)

INT_PAIRS = [(float(s), float(t)) for s in range(8) for t in range(s + 1, 8)]


def marginal_summation_oracle(cubic):
    """Direct summation over the middle index, independent of the library."""
    e = cubic.entries
    m = e.shape[0]
    return np.array([[sum(e[i, j, r] for j in range(m)) for r in range(m)]
                     for i in range(m)])


# -- evaluation ---------------------------------------------------------------

def test_m1_all_quarters():
    fam = make_family("M1")
    for s, t in [(0.0, 0.5), (1.0, 7.5)]:
        assert np.all(fam.evaluate(s, t).entries == 0.25)


def test_m2_frozen_values_at_0_2():
    fam = make_family("M2", {"PHI": "3^(-t)"})
    cubic = fam.evaluate(0, 2)
    e = cubic.entries
    f = 5.0 / 18.0  # (1/9 + 1)/4
    assert e[0, 0, 0] == pytest.approx(f, abs=1e-15)
    assert e[0, 0, 1] == pytest.approx(f, abs=1e-15)
    assert e[1, 0, 0] == pytest.approx(f, abs=1e-15)
    assert e[1, 0, 1] == pytest.approx(1.0 / 6.0, abs=1e-15)
    for idx in ((0, 1, 0), (0, 1, 1), (1, 1, 0)):
        assert e[idx] == pytest.approx(2.0 / 9.0, abs=1e-15)
    assert e[1, 1, 1] == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_m2_marginal_is_constant_half_matrix():
    fam = make_family("M2", {"PHI": "3^(-t)"})
    for s, t in [(0, 1), (0, 2), (2, 5)]:
        cubic = fam.evaluate(s, t)
        oracle = marginal_summation_oracle(cubic)
        assert np.abs(oracle - 0.5).max() <= 1e-15
        assert middle_marginal(cubic).allclose(SquareMatrix(oracle), tol=1e-15)


def test_cantor_b_ratio_value():
    fam = make_family("CANTOR_B", {"PHI": "exp(-t)"})
    assert fam.evaluate(1, 3) == pytest.approx(math.exp(-2), abs=1e-15)


def test_order_precondition():
    fam = make_family("M1")
    with pytest.raises(ValueError, match="0 <= s < t"):
        fam.evaluate(2, 2)
    with pytest.raises(ValueError, match="0 <= s < t"):
        fam.evaluate(-1, 2)


def test_eval_family_wrapper():
    assert np.all(eval_family(make_family("M3"), 0, 1).entries == 0.25)


def test_uniform_dimension():
    fam = make_family("UNIFORM", m=3)
    assert np.all(fam.evaluate(0, 1).entries == pytest.approx(1 / 9))


def test_q_family_shapes():
    q1 = make_family("Q1", {"G": 0.3}).evaluate(0, 1)
    assert np.allclose(q1.entries, [[0.3, 0.3], [0.7, 0.7]])
    q4 = make_family("Q4", {"PSI": "exp(-t)"}).evaluate(0, 1)
    r = math.exp(-1)
    assert np.allclose(q4.entries, [[1, 0], [1 - r, r]])
    rot = make_family("ROT").evaluate(0, math.pi / 2)
    assert np.allclose(rot.entries, [[0, 1], [-1, 0]], atol=1e-15)


def test_piecewise_half_open_convention():
    q3 = make_family("Q3", {"B": 2})
    assert np.allclose(q3.evaluate(0, 1.999).entries, np.eye(2))
    assert np.allclose(q3.evaluate(0, 2.0).entries, 0.5)  # t >= b
    m6 = make_family("M6", {"A": 2})
    assert m6.evaluate(0, 1.999).entries[0, 0, 0] == 0.5
    assert m6.evaluate(0, 2.0).entries[0, 0, 0] == 0.25
    cantor = make_family("CANTOR_C", {"C": 5})
    assert cantor.evaluate(1, 2) == 1.0
    assert cantor.evaluate(1, 7) == 0.0


# -- construction-time constraints -------------------------------------------

def test_q6_parameter_constraint():
    with pytest.raises(ValueError, match="2\\*MU < LAMBDA"):
        make_family("Q6", {"LAMBDA": 2, "MU": 1})
    make_family("Q6", {"LAMBDA": 3, "MU": 1})  # 0 < 2 < 3 is fine


@pytest.mark.parametrize("family_id,param", [("Q3", "B"), ("Q7", "A"),
                                             ("M6", "A"), ("CANTOR_C", "C")])
def test_thresholds_must_be_positive(family_id, param):
    with pytest.raises(ValueError, match="positive"):
        make_family(family_id, {param: 0})


def test_unknown_family_and_param_rejected():
    with pytest.raises(ValueError, match="unknown family"):
        make_family("M9")
    with pytest.raises(ValueError, match="does not take parameter"):
        make_family("M1", {"PHI": "3^(-t)"})
    with pytest.raises(ValueError, match="must be a constant"):
        make_family("M6", {"A": "2*t"})


def test_discrete_paramfn_rejects_fractional_times():
    fn = ParamFn.from_expression("3^(-t)", domain="discrete")
    assert fn(2) == pytest.approx(1 / 9)
    with pytest.raises(FamilyDomainError):
        fn(0.5)


def test_paramfn_builtin_tags():
    assert ParamFn.exp_decay(0.5)(2.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert ParamFn.pow_decay(3)(2.0) == pytest.approx(1 / 9, abs=1e-15)
    with pytest.raises(ValueError, match="positive"):
        ParamFn.pow_decay(0)
    # tags slot in anywhere an expression does
    fam = make_family("M2", {"PHI": ParamFn.pow_decay(3, domain="discrete")})
    assert fam.evaluate(0, 2).entries[0, 0, 0] == pytest.approx(5 / 18)


# -- validity domains ---------------------------------------------------------

def test_m2_valid_on_integer_grid():
    fam = make_family("M2", {"PHI": "3^(-t)"})
    assert validate_domain(fam, INT_PAIRS) == []


def test_m2_ratio_violation_value():
    fam = make_family("M2", {"PHI": "exp(-t)"}, time_domain="continuous")
    violations = validate_domain(fam, [(0.0, 0.5)])
    ratio_violations = [v for v in violations if "1/3" in v.condition]
    assert ratio_violations
    assert ratio_violations[0].value == pytest.approx(math.exp(-0.5), abs=1e-12)
    with pytest.raises(FamilyDomainError, match="1/3"):
        fam.evaluate(0.0, 0.5)


def test_m4_valid_on_integer_grid():
    fam = make_family("M4", {"PSI": "2^(-t)"})
    assert validate_domain(fam, INT_PAIRS) == []


def test_m5_ratio_bound():
    fam = make_family("M5", {"PHI": "exp(t)"})  # increasing: ratio > 1
    violations = validate_domain(fam, [(0.0, 1.0)])
    assert any("<= 1" in v.condition for v in violations)


def test_validate_domain_entry_ranges_on_builtins():
    grid = [(0.0, 1.0), (0.0, 2.5), (1.0, 3.0)]
    for family_id in ("M1", "M3", "M5", "M6", "Q1", "Q2", "Q3", "Q4", "Q5",
                      "Q6", "Q7", "CANTOR_A", "CANTOR_B", "CANTOR_C"):
        assert validate_domain(make_family(family_id), grid) == []


def test_rotation_flagged_as_out_of_range():
    violations = validate_domain(make_family("ROT"), [(0.0, math.pi / 4)])
    assert any("within [0, 1]" in v.condition for v in violations)


def test_m2_f_stays_below_one_third():
    fam = make_family("M2", {"PHI": "3^(-t)"})
    for s, t in INT_PAIRS:
        assert fam.f(s, t) <= 1.0 / 3.0 + 1e-15


def test_step_f_family_violates_range_below_threshold():
    # piecewise f in {1/2, 1/4}: f = 1/2 makes the (1,0,1) entry negative
    step = TabulatedCubic(
        lambda s, t: m2_entries(0.5 if t < 3.0 else 0.25), m=2)
    violations = validate_domain(step, [(0.0, 1.0)])
    assert any(v.value == pytest.approx(-0.5) for v in violations)
    assert validate_domain(step, [(0.0, 4.0)]) == []


# -- internal consistency of the parameterised families -----------------------

INT_TRIPLES = [(s, tau, t) for s in range(6) for tau in range(s + 1, 7)
               for t in range(tau + 1, 8)]


def test_m2_f_equation_on_triples():
    fam = make_family("M2", {"PHI": "3^(-t)"})
    for s, tau, t in INT_TRIPLES:
        f1, f2, f = fam.f(s, tau), fam.f(tau, t), fam.f(s, t)
        assert f == pytest.approx(4 * f1 * f2 - f2 - f1 + 0.5, abs=1e-12)
        h1, h2, h = 4 * f1 - 1, 4 * f2 - 1, 4 * f - 1
        assert h == pytest.approx(h1 * h2, abs=1e-12)


def test_m4_g_equation_on_triples():
    fam = make_family("M4", {"PSI": "2^(-t)"})
    for s, tau, t in INT_TRIPLES:
        fval = lambda a, b: fam.evaluate(a, b).entries[1, 0, 1]
        g1, g2, g = (4 * fval(s, tau) - 1, 4 * fval(tau, t) - 1,
                     4 * fval(s, t) - 1)
        assert g == pytest.approx(0.5 * g1 * g2, abs=1e-12)


def test_m5_l_equation_solved_by_g():
    fam = make_family("M5", {"PHI": "exp(-t)"})
    for s, tau, t in [(0.0, 0.7, 1.3), (0.2, 1.0, 3.5), (1.0, 2.0, 4.0)]:
        l1, l2, l = fam.g(s, tau), fam.g(tau, t), fam.g(s, t)
        rhs = 2 * l1 * l2 - 0.5 * (l1 + l2) + 0.25 + 0.5 * fam.g(s, t)
        assert l == pytest.approx(rhs, abs=1e-12)


# -- the slice construction ----------------------------------------------------

def test_build_m7_from_q1_and_zero():
    spec = M7Spec(make_family("Q1", {"G": 0.3}), make_family("ZERO"))
    cubic = build_m7(spec, 0, 1)
    e = cubic.entries
    assert np.all(e[:, 0, :] == 0.0)
    assert np.allclose(e[:, 1, :], [[0.3, 0.3], [0.7, 0.7]])
    assert first_slice(cubic).allclose(SquareMatrix(np.zeros((2, 2))))
    assert middle_marginal(cubic).allclose(SquareMatrix([[0.3, 0.3], [0.7, 0.7]]))


def test_build_m7_b_equals_c():
    half = make_family("HALF")
    cubic = build_m7(M7Spec(half, half), 0, 1)
    assert np.all(cubic.entries[:, 0, :] == 0.5)
    assert np.all(cubic.entries[:, 1, :] == 0.0)


def test_build_m7_range_rejection_names_witness():
    # C = identity (a constant idempotent) with B = Q1(0.3): B - C has
    # the negative entry 0.3 - 1 = -0.7
    identity = TabulatedSquare(lambda s, t: np.eye(2), family_id="EYE")
    spec = M7Spec(make_family("Q1", {"G": 0.3}), identity)
    with pytest.raises(FamilyDomainError, match=r"B - C entries within \[0, 1\]"):
        build_m7(spec, 0, 1)


def test_m7_family_slice_and_marginal_invert_construction():
    fam = make_m7(make_family("Q2", {"PSI": "exp(-t)"}), make_family("ZERO"))
    for s, t in [(0.0, 1.0), (0.5, 2.0)]:
        cubic = fam.evaluate(s, t)
        b = fam.spec.b_family.evaluate(s, t)
        assert middle_marginal(cubic).allclose(b, tol=1e-15)
        assert first_slice(cubic).allclose(SquareMatrix(np.zeros((2, 2))))


GRID_PAIRS = [(s, t) for s in np.linspace(0, 4, 8)
              for t in np.linspace(0, 4, 8) if s < t]


def test_classify_m7_types():
    q1_zero = M7Spec(make_family("Q1", {"G": 0.3}), make_family("ZERO"))
    assert classify_m7_type(q1_zero, GRID_PAIRS) == {"12|max"}

    half = make_family("HALF")
    both_half = M7Spec(half, half)
    assert classify_m7_type(both_half, GRID_PAIRS) == {"12|max", "23|max"}

    q2_zero = M7Spec(make_family("Q2", {"PSI": "exp(-t)"}), make_family("ZERO"))
    assert classify_m7_type(q2_zero, GRID_PAIRS) == {"12|max", "23|max"}


def test_classify_m7_type_13_case():
    # B = Q1 with g = 1 ([[1,1],[0,0]]) and C the constant idempotent
    # [[1,0],[0,0]]: totals are 2 and 1, so the (1,3) conditions hold.
    b = make_family("Q1", {"G": 1.0})
    c = TabulatedSquare(lambda s, t: np.array([[1.0, 0.0], [0.0, 0.0]]))
    types = classify_m7_type(M7Spec(b, c), GRID_PAIRS)
    assert types == {"12|max", "13|max"}


def test_classify_m7_never_returns_2max():
    specs = [
        M7Spec(make_family("Q1", {"G": 0.5}), make_family("ZERO")),
        M7Spec(make_family("HALF"), make_family("HALF")),
        M7Spec(make_family("Q4", {"PSI": "exp(-t)"}), make_family("ZERO")),
    ]
    for spec in specs:
        assert "2|max" not in classify_m7_type(spec, GRID_PAIRS)


# -- the left-stochastic counterexample record ---------------------------------

def test_negative_example_gq():
    demo = negative_example_gq()
    assert np.array_equal(demo.q.entries, [[0.0, 0.0], [1.0, 1.0]])
    assert demo.q_kce_residual == 0.0           # Q is idempotent
    assert demo.g_equation_residual == 0.0      # 1/2 - (1 - 1/2)
    assert demo.required_p000 == 0.0
    assert demo.assumed_p000 == 0.5
    assert demo.contradiction
