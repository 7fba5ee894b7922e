from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import laurent_to_sympy, q, qrat_to_sympy, sympy_equal
from qkrec.errors import EvalAtPole, InversionOfZero, NotInvertible, NotPolynomialInQ
from qkrec.scalarq import (OneMinusQExpansion, QLaurent, QRat, eval_q, expand_one_minus_q,
                           format_rational, qrat_arith, rational_eigenvalues,
                           split_laurent_proper)

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
laurents = st.dictionaries(st.integers(-3, 4), small_fracs, max_size=4).map(QLaurent)
polys = st.dictionaries(st.integers(0, 5), small_fracs, max_size=4).map(QLaurent)
factors = st.lists(st.tuples(st.integers(1, 4), st.integers(1, 2)), max_size=3)
qrats = st.builds(lambda n, f: QRat(n, tuple(f)), laurents, factors)

ONE_MINUS_Q = QLaurent({0: 1, 1: -1})


# -- documented examples ------------------------------------------------------

def test_bar_of_q():
    assert QRat(QLaurent({1: 1})).bar() == QRat(QLaurent({-1: 1}))


def test_inverse_of_one_minus_q():
    assert qrat_arith(QRat(ONE_MINUS_Q), None, "inv") == QRat.one_over(1)


def test_product_with_barred_pole():
    # 1/(1-q^-1) = -q/(1-q), so the product is -q/(1-q)^2
    a = QRat.one_over(1)
    got = qrat_arith(a, a.bar(), "mul")
    assert got == QRat(QLaurent({1: -1}), ((1, 2),))
    assert sympy_equal(qrat_to_sympy(got), 1 / (1 - q) / (1 - 1 / q))


def test_split_examples():
    lau, prop = split_laurent_proper(QRat(QLaurent({1: 1}), ((1, 1),)))
    assert lau == QLaurent({0: -1}) and prop == QRat.one_over(1)
    lau, prop = split_laurent_proper(QRat(5))
    assert lau == QLaurent({0: 5}) and prop.is_zero()
    lau, prop = split_laurent_proper(QRat(QLaurent({-1: 1, 0: 1}), ((1, 1),)))
    assert lau == QLaurent({-1: 1}) and prop == QRat(2, ((1, 1),))


def test_one_minus_q_examples():
    assert expand_one_minus_q(QLaurent({1: 1})).coefficients == (1, -1)
    assert expand_one_minus_q(QLaurent({2: 1})).coefficients == (1, -2, 1)
    assert expand_one_minus_q(QLaurent({0: 3})).coefficients == (3,)
    assert expand_one_minus_q(QLaurent()).coefficients == ()


def test_one_minus_q_rejects_negative_powers():
    with pytest.raises(NotPolynomialInQ):
        expand_one_minus_q(QLaurent({-1: 1}))
    with pytest.raises(NotPolynomialInQ):
        expand_one_minus_q(QRat.one_over(2))


def test_eval_examples():
    assert eval_q(QLaurent({2: 1, 1: -2}), 1) == -1
    assert eval_q(QLaurent({-1: 1}), 2) == Fraction(1, 2)
    p = QLaurent({0: 4, 3: -1})
    assert eval_q(p, 1) == expand_one_minus_q(p)[0]
    with pytest.raises(EvalAtPole):
        eval_q(QLaurent({-2: 1}), 0)


def test_inverse_of_zero():
    with pytest.raises(InversionOfZero):
        QRat(0).inv()


def test_rational_eigenvalues_examples():
    s = rational_eigenvalues([1, -2, 1])
    assert list(s) == [(1, 2)] and not s.has_irrational
    assert list(rational_eigenvalues([0, 0, 0, 1])) == [(0, 3)]
    s = rational_eigenvalues([-2, 0, 1])
    assert list(s) == [] and s.has_irrational


def test_format_rational():
    assert format_rational(Fraction(-3, 4)) == "-3/4"
    assert format_rational(Fraction(6, 3)) == "2"


def test_canonical_form_cancels_common_factors():
    # (1 - q^2) / (1 - q) = 1 + q
    f = QRat(QLaurent({0: 1, 2: -1}), ((1, 1),))
    assert f.denominator_factors == () and f.numerator == QLaurent({0: 1, 1: 1})


def test_json_roundtrip():
    f = QRat(QLaurent({-1: Fraction(2, 3), 2: 5}), ((1, 2), (3, 1)))
    assert QRat.from_json(f.to_json()) == f


# -- properties against a computer-algebra oracle -----------------------------

@given(qrats, qrats)
def test_arithmetic_matches_sympy(a, b):
    sa, sb = qrat_to_sympy(a), qrat_to_sympy(b)
    assert sympy_equal(qrat_to_sympy(a + b), sa + sb)
    assert sympy_equal(qrat_to_sympy(a * b), sa * sb)
    assert sympy_equal(qrat_to_sympy(a - b), sa - sb)


def _unit(c, k, num_factors, den_factors):
    out = QRat(QLaurent({k: c}), tuple(den_factors))
    for m, e in num_factors:
        out = out * QRat(QLaurent({0: 1, m: -1})) ** e
    return out


units = st.builds(_unit, small_fracs.filter(bool), st.integers(-3, 3), factors, factors)


@given(units)
def test_inverse_matches_sympy(a):
    assert sympy_equal(qrat_to_sympy(a.inv()), 1 / qrat_to_sympy(a))
    assert a * a.inv() == QRat(1)


def test_inverse_needs_a_cyclotomic_numerator():
    with pytest.raises(NotInvertible):
        QRat(QLaurent({0: 1, 1: 2})).inv()


@given(qrats)
def test_bar_matches_sympy(a):
    assert sympy_equal(qrat_to_sympy(a.bar()), qrat_to_sympy(a).subs(q, 1 / q))


@given(qrats)
def test_bar_is_an_involution(a):
    assert a.bar().bar() == a


@given(qrats)
def test_bar_keeps_the_denominator_shape(a):
    for m, e in a.bar().denominator_factors:
        assert m >= 1 and e >= 1


@given(qrats)
def test_split_recombines(f):
    lau, prop = split_laurent_proper(f)
    assert QRat(lau) + prop == f
    assert prop.is_proper()
    assert set(prop.denominator_factors) <= set(f.denominator_factors) or prop.is_zero()


@given(qrats)
def test_split_is_idempotent(f):
    lau, prop = split_laurent_proper(f)
    l2, p2 = split_laurent_proper(prop)
    assert l2.is_zero() and p2 == prop
    l3, p3 = split_laurent_proper(QRat(lau))
    assert l3 == lau and p3.is_zero()


@given(qrats, laurents)
def test_split_is_unique(f, other):
    lau, prop = split_laurent_proper(f)
    assume(other != lau)
    # any other Laurent part leaves a remainder that is not proper
    assert not (f - QRat(other)).is_proper()


@given(polys)
def test_one_minus_q_roundtrip(p):
    e = expand_one_minus_q(p)
    assert e.to_laurent() == p
    s = sympy.Symbol("s")
    expr = sum((sympy.Rational(c.numerator, c.denominator) * s ** k for k, c in enumerate(e)),
               sympy.Integer(0))
    assert sympy.expand(expr.subs(s, 1 - q) - laurent_to_sympy(p)) == 0


@given(polys, st.fractions(min_value=-3, max_value=3, max_denominator=4))
def test_expansion_evaluation_agrees(p, x):
    assert expand_one_minus_q(p).eval(x) == eval_q(p, x)


@given(qrats, st.fractions(min_value=2, max_value=5, max_denominator=3))
def test_evaluation_matches_sympy(f, x):
    expected = sympy.Rational(qrat_to_sympy(f).subs(q, sympy.Rational(x.numerator, x.denominator)))
    assert eval_q(f, x) == Fraction(int(expected.p), int(expected.q))


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(1, 3)), max_size=3),
       st.booleans())
def test_rational_roots_with_multiplicity(roots, irrational):
    x = sympy.Symbol("x")
    poly = sympy.Integer(1)
    for r, m in roots:
        poly *= (x - r) ** m
    if irrational:
        poly *= x ** 2 - 3
    coeffs = [Fraction(int(c)) for c in reversed(sympy.Poly(poly, x).all_coeffs())]
    spec = rational_eigenvalues(coeffs)
    want = {}
    for r, m in roots:
        want[r] = want.get(r, 0) + m
    assert dict(spec.roots) == {Fraction(r): m for r, m in want.items()}
    assert spec.has_irrational == irrational


def test_expansion_type_trims_trailing_zeros():
    assert OneMinusQExpansion((1, 0, 0)).coefficients == (1,)
