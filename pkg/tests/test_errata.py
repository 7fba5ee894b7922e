"""The two recorded CP^1 misprints, shown wrong from the printed data alone.

Nothing here runs the reconstruction: every input is a printed expression from
the fixtures (or the degree-zero classical data), checked with sympy.
"""
import json
from importlib import resources

import pytest
import sympy


t = sympy.Symbol("t")


def _entries():
    doc = json.loads(resources.files("qkrec").joinpath("data/golden.json").read_text())
    return {e["id"]: e for e in doc["entries"]}


def sym(text):
    return sympy.sympify(text.replace("^", "**"), locals={"t": t, "exp": sympy.exp})


def vanishes(expr):
    return sympy.simplify(sympy.expand(expr)) == 0


@pytest.fixture(scope="module")
def printed():
    return _entries()


@pytest.fixture(scope="module")
def scalar_data(printed):
    # y_0, x_0 from the degree-zero product by P^-1, g_0 = e^t (1 - t) is the classical pairing
    O1 = printed["cp1.Omega1"]["expected"]
    O2 = printed["cp1.Omega2"]["expected"]
    y = {0: sympy.Integer(-1), 1: sym(O1[0][1]), 2: sym(O2[0][1]),
         3: sym(printed["cp1.y3"]["expected"])}
    x = {0: sympy.Integer(2), 1: sym(O1[1][1]), 2: sym(O2[1][1])}
    g = {0: sympy.exp(t) * (1 - t)}
    for d in (1, 2, 3):
        g[d] = sym(printed["cp1.g%d" % d]["expected"])
    return y, x, g


def scalar_residual(d, y, x, g):
    """g_d'' - sum_a (y_a g_{d-a} + x_a g_{d-a}')."""
    rhs = sum((y[a] * g[d - a] + x[a] * sympy.diff(g[d - a], t) for a in range(d + 1)),
              sympy.Integer(0))
    return sympy.diff(g[d], t, 2) - rhs


@pytest.mark.parametrize("d", [0, 1, 2])
def test_scalar_equation_holds_on_printed_data_in_low_degree(scalar_data, d):
    y, x, g = scalar_data
    assert vanishes(scalar_residual(d, y, x, g))


def test_printed_x3_breaks_the_scalar_equation(scalar_data, printed):
    y, x, g = scalar_data
    x3 = sym(printed["cp1.x3"]["expected"])
    assert not vanishes(scalar_residual(3, y, {**x, 3: x3}, g))
    assert vanishes(scalar_residual(3, y, {**x, 3: -x3}, g))


def test_x3_erratum_is_the_negation(printed):
    e = printed["cp1.x3"]
    assert vanishes(sym(e["erratum"]["expected"]) + sym(e["expected"]))


def _a21(printed, corrected):
    e = printed["cp1.A2.1"]
    rows = [[sym(c) for c in row] for row in e["expected"]]
    if corrected:
        (err,) = e["errata"]
        a, b = err["entry"]
        rows[a][b] = sym(err["expected"])
    return sympy.Matrix(rows)


def _a0_omega2(printed):
    A0 = sympy.Matrix([[0, -1], [1, 2]])
    O2 = sympy.Matrix([[sym(c) for c in row] for row in printed["cp1.Omega2"]["expected"]])
    return A0 * O2


def test_printed_a21_entry_misses_the_initial_condition(printed):
    # A(q, Q, 0) has no Q^2 term, so every (1-q)-layer of degree two vanishes at t = 0
    printed_at0 = _a21(printed, False).subs(t, 0)
    assert printed_at0[1, 1] == sympy.Rational(1, 4)
    assert printed_at0[0, 1] == 0
    assert _a21(printed, True).subs(t, 0) == sympy.zeros(2, 2)


def test_printed_a21_entry_misses_its_differential_equation(printed):
    rhs = _a0_omega2(printed)
    wrong = _a21(printed, False).diff(t) - rhs
    right = _a21(printed, True).diff(t) - rhs
    assert vanishes(wrong[0, 1]) and not vanishes(wrong[1, 1])
    assert all(vanishes(c) for c in right)
