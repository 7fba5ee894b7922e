from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from qkrec.errors import DimensionMismatch, ResidualNonzero
from qkrec.exppoly import ExpPoly, OdeProblem, check_ode_solution, solve_linear_ode
from qkrec.exprparse import parse_exppoly

T = sympy.symbols("t0 t1")


def to_sympy(f: ExpPoly):
    out = sympy.Integer(0)
    for (lam, mono), c in f.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for x, l, k in zip(T, lam, mono):
            term *= sympy.exp(sympy.Rational(Fraction(l).numerator, Fraction(l).denominator) * x) * x ** k
        out += term
    return out


def same(f, expr):
    return sympy.simplify(to_sympy(f) - expr) == 0


def ep(text, names=("t",)):
    return parse_exppoly(text, list(names))


t = ExpPoly.var(0, 1)


def test_ring_examples():
    e = ExpPoly.exp([-1])
    assert e * e == ExpPoly.exp([-2])
    assert t * ExpPoly.exp([1]) == ep("t*exp(t)")
    assert (ExpPoly.exp([1]) - ExpPoly.exp([1])).is_zero()


def test_derivative_examples():
    assert (t * ExpPoly.exp([-1])).differentiate(0) == ep("(1-t)*exp(-t)")
    # the pair of degree-one CP^1 entries: d/dt of (1+t)e^-t is -t e^-t
    assert ep("(1+t)*exp(-t)").differentiate(0) == ep("-t*exp(-t)")
    assert ExpPoly.exp([1, 0]).differentiate(1).is_zero()


def test_eval_zero_examples():
    assert ep("(1+t)*exp(-t)").eval_zero(0) == ExpPoly.constant(1, 1)
    s_et = ep("s*exp(t)", ("t", "s"))
    assert s_et.eval_zero(0) == ep("s", ("t", "s"))


def test_eval_zero_of_a_degree_two_pairing_term():
    g2 = ep("(exp(-t)*(8+5*t+t^2) + exp(t)*(8-5*t+t^2))/16")
    assert g2.eval_zero(0) == ExpPoly.constant(1, 1)


def test_pretty_groups_by_exponential():
    f = ep("exp(-2*t)*(3+6*t) + 1")
    assert f.pretty() == "e^{-2t}(3 + 6*t) + 1"
    assert ExpPoly.zero(1).pretty() == "0"


def test_json_roundtrip():
    f = ep("exp(-2*t)*(3/2+6*t^2) - t")
    assert ExpPoly.from_json(f.to_json(), 1) == f


def test_substitute_linear():
    f = ep("exp(t0)*t1", ("t0", "t1"))
    # t0 = u0 + u1, t1 = -u1
    g = f.substitute_linear([[1, 1], [0, -1]])
    assert same(g, sympy.exp(T[0] + T[1]) * (-T[1]))


def test_taylor_derivative():
    f = ep("t^2*exp(3*t)")
    # third derivative at 0 of t^2 e^{3t} = 3 * 2 * 3 = 18
    assert f.taylor_derivative([3]) == 18


def test_division_by_scalar():
    assert ep("(2+4*t)/2") == ep("1+2*t")


# -- ODE solver ---------------------------------------------------------------

def _solve(L, B, Y0, a=0, nvars=1):
    B = [ExpPoly.coerce(b, nvars) for b in B]
    Y0 = [ExpPoly.coerce(y, nvars) for y in Y0]
    return solve_linear_ode(OdeProblem(len(L), L, B, Y0, a))


def test_ode_examples():
    (y,) = _solve([[1]], [ExpPoly.exp([2])], [1])
    assert y == ExpPoly.exp([2])
    (y,) = _solve([[1]], [ExpPoly.exp([1])], [0])
    assert y == t * ExpPoly.exp([1])
    (y,) = _solve([[0]], [t], [0])
    assert y == t * t / 2


def test_ode_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        solve_linear_ode(OdeProblem(2, [[0]], [t], [ExpPoly.zero(1)], 0))
    with pytest.raises(DimensionMismatch):
        solve_linear_ode(OdeProblem(1, [[0]], [t], [t], 0))


def test_ode_with_coefficients_in_the_other_variable():
    s = ExpPoly.var(1, 2)
    tt = ExpPoly.var(0, 2)
    B = [s * ExpPoly.exp([1, 0]), tt]
    Y0 = [s, ExpPoly.constant(1, 2)]
    L = [[1, 1], [0, 1]]
    Y = solve_linear_ode(OdeProblem(2, L, B, Y0, 0))
    check_ode_solution(OdeProblem(2, L, B, Y0, 0), Y)
    for y, y0 in zip(Y, Y0):
        assert y.eval_zero(0) == y0


def test_residual_check_rejects_a_wrong_solution():
    prob = OdeProblem(1, [[1]], [ExpPoly.zero(1)], [ExpPoly.constant(1, 1)], 0)
    check_ode_solution(prob, [ExpPoly.exp([1])])
    with pytest.raises(ResidualNonzero):
        check_ode_solution(prob, [ExpPoly.exp([2])])
    with pytest.raises(ResidualNonzero):
        check_ode_solution(prob, [ExpPoly.exp([1]) * 2])


# random triangular systems have rational (integer) spectra
small = st.integers(-2, 2)
frac = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@st.composite
def ode_problems(draw, n=None):
    n = n or draw(st.integers(1, 3))
    L = [[Fraction(draw(small)) if j >= i else Fraction(0) for j in range(n)] for i in range(n)]
    B = []
    for _ in range(n):
        b = ExpPoly.zero(1)
        for _ in range(draw(st.integers(0, 2))):
            b = b + ExpPoly.exp([draw(small)]) * t ** draw(st.integers(0, 2)) * draw(frac)
        B.append(b)
    Y0 = [ExpPoly.constant(draw(frac), 1) for _ in range(n)]
    return OdeProblem(n, L, B, Y0, 0)


def _sympy_residual_zero(prob, Y):
    x = T[0]
    for i in range(prob.dimension):
        lhs = sympy.diff(to_sympy(Y[i]), x)
        rhs = sum((sympy.Rational(prob.L[i][j].numerator, prob.L[i][j].denominator) * to_sympy(Y[j])
                   for j in range(prob.dimension)), sympy.Integer(0)) + to_sympy(prob.B[i])
        if sympy.simplify(lhs - rhs) != 0:
            return False
    return True


@given(ode_problems())
def test_ode_solution_satisfies_the_equation(prob):
    Y = solve_linear_ode(prob)
    assert _sympy_residual_zero(prob, Y)
    assert [y.eval_zero(0) for y in Y] == [y.eval_zero(0) for y in prob.Y0]


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(ode_problems(n), ode_problems(n))))
def test_ode_is_linear(pair):
    p1, p2 = pair
    L = p1.L
    p2 = OdeProblem(p1.dimension, L, p2.B, p2.Y0, 0)
    summed = OdeProblem(p1.dimension, L, [a + b for a, b in zip(p1.B, p2.B)],
                        [a + b for a, b in zip(p1.Y0, p2.Y0)], 0)
    Y1, Y2, Y = solve_linear_ode(p1), solve_linear_ode(p2), solve_linear_ode(summed)
    assert [a + b for a, b in zip(Y1, Y2)] == list(Y)


@given(st.integers(1, 3), st.data())
def test_nilpotent_system_with_polynomial_forcing_stays_polynomial(n, data):
    L = [[Fraction(data.draw(small)) if j > i else Fraction(0) for j in range(n)] for i in range(n)]
    B = [ExpPoly.constant(data.draw(frac), 1) + t * data.draw(frac) for _ in range(n)]
    Y0 = [ExpPoly.constant(data.draw(frac), 1) for _ in range(n)]
    Y = solve_linear_ode(OdeProblem(n, L, B, Y0, 0))
    for y in Y:
        assert all(not any(lam) for lam, _ in y.terms)


@given(st.lists(st.tuples(small, st.integers(0, 2), frac), max_size=3),
       st.lists(st.tuples(small, st.integers(0, 2), frac), max_size=3))
def test_ring_operations_match_sympy(fa, fb):
    def build(spec):
        out = ExpPoly.zero(1)
        for lam, k, c in spec:
            out = out + ExpPoly.exp([lam]) * t ** k * c
        return out
    a, b = build(fa), build(fb)
    assert same(a + b, to_sympy(a) + to_sympy(b))
    assert same(a * b, to_sympy(a) * to_sympy(b))
    assert same(a.differentiate(0), sympy.diff(to_sympy(a), T[0]))
    assert same(a.eval_zero(0), to_sympy(a).subs(T[0], 0))
