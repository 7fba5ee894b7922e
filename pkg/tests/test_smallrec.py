from fractions import Fraction

import pytest
import sympy

from qkrec.checks import run_small_checks
from qkrec.errors import SplitLeavesResidue
from qkrec.golden import load_suite
from qkrec.linalg import Mat
from qkrec.novikov import NovikovSeries, degrees_upto
from qkrec.scalarq import QLaurent, QRat
from qkrec.smallrec import (birkhoff_factorize, build_M, check_relation, finiteness_report,
                            relation_series, semisimple_verdict, semisimplicity_probe,
                            small_theory)
from qkrec.target import cpn, preset

Q1, Q2, X = sympy.symbols("Q1 Q2 x")


def printed(entry_id):
    suite = load_suite("paper")
    (e,) = [e for e in suite.entries if e.id == entry_id]
    return e.spec


def printed_fl3_matrices():
    out = []
    for name in ("fl3.A1", "fl3.A2"):
        rows = printed(name)["expected"]
        out.append(sympy.Matrix([[sympy.sympify(x, locals={"Q1": Q1, "Q2": Q2}) for x in r]
                                 for r in rows]))
    return out


def series_to_sympy(series, names):
    out = None
    for d, m in series.items():
        mono = sympy.Integer(1)
        for v, k in zip(names, d):
            mono *= v ** k
        term = sympy.Matrix(m.nrows, m.ncols,
                            lambda i, j: sympy.Rational(m[i, j].numerator, m[i, j].denominator)) * mono
        out = term if out is None else out + term
    return out


def cpn_matrix(N, Q):
    n = N + 1
    A = sympy.eye(n)
    for i in range(1, n):
        A[i, i - 1] = -1
    A[0, N] = -Q
    return A


# -- M and its factorisation --------------------------------------------------------

def test_degree_zero_columns_are_the_basis():
    for name in ("cp2", "fl3"):
        t = preset(name)
        M0 = build_M(t, 1)[(0,) * t.picard_rank]
        assert M0 == Mat.identity(t.rank).map(QRat.coerce, QRat(0))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_cpn_columns_match_the_closed_form(N):
    """Column alpha at Q^d is (1 - q^d P^-1)^(alpha-N-1) prod_{k<d} (1 - q^k P^-1)^-(N+1).

    Both sides are compared exactly at several rational q, with P^-1 = 1 - h
    and h^(N+1) = 0.
    """
    cutoff = 3
    M = build_M(cpn(N), cutoff)

    def inv_factor(x, k, power):
        # (a + b h)^{-p} = sum_j binom(-p, j) a^{-p-j} b^j h^j
        a, b = 1 - x ** k, x ** k
        return [Fraction(int(sympy.binomial(-power, j))) * a ** (-power - j) * b ** j
                for j in range(N + 1)]

    def mul(u, v):
        out = [Fraction(0)] * (N + 1)
        for i, x in enumerate(u):
            for j, y in enumerate(v):
                if i + j <= N:
                    out[i + j] += x * y
        return out

    for x in (Fraction(2), Fraction(-3), Fraction(1, 2), Fraction(5, 7), Fraction(-2, 9)):
        for d in range(1, cutoff + 1):
            for alpha in range(N + 1):
                expr = inv_factor(x, d, N + 1 - alpha)
                for k in range(1, d):
                    expr = mul(expr, inv_factor(x, k, N + 1))
                got = [M[(d,)][beta, alpha].eval(x) for beta in range(N + 1)]
                assert got == expr, (x, d, alpha)


def test_cpn_birkhoff_split_is_trivial():
    f = birkhoff_factorize(build_M(cpn(3), 4))
    assert len(f.U) == 1
    assert f.T.get((0,)).is_identity()


def test_single_split_example():
    E = Mat.rational([[0, 1], [0, 0]]).map(QRat.coerce, QRat(0))
    I = Mat.identity(2).map(QRat.coerce, QRat(0))
    c = QRat(QLaurent({1: 1})) + QRat.one_over(1)
    M = NovikovSeries({(0,): I, (1,): E.map(lambda x: x * c, QRat(0))}, 1, 1)
    f = birkhoff_factorize(M)
    assert f.T[(1,)] == E.map(lambda x: x * QRat.one_over(1), QRat(0))
    assert f.U[(1,)][0, 1] == QLaurent({1: 1})
    assert f.U[(0,)].is_identity()


def test_factorisation_needs_an_identity_leading_term():
    M = NovikovSeries({(0,): Mat.rational([[2]]).map(QRat.coerce, QRat(0))}, 1, 1)
    with pytest.raises(SplitLeavesResidue):
        birkhoff_factorize(M)


# -- shift operators, products and pairing -------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_cpn_shift_operator(N):
    s = small_theory(cpn(N), 8)
    Q = sympy.Symbol("Q")
    got = series_to_sympy(s.shift.A_com[0], [Q])
    assert got == cpn_matrix(N, Q)
    # and A itself carries no q-dependence
    for d, m in s.shift.A[0].items():
        assert all(x.is_constant() for _, _, x in m.entries())


@pytest.mark.parametrize("N", [1, 2, 4])
def test_cpn_products(N):
    s = small_theory(cpn(N), 8)
    for a in range(N + 1):
        for b in range(N + 1):
            want = {}
            k = a + b
            if k <= N:
                want[(0,)] = [int(g == k) for g in range(N + 1)]
            else:
                want[(1,)] = [int(g == k - N - 1) for g in range(N + 1)]
            got = {d: m.column(b) for d, m in s.products[a].items() if any(m.column(b))}
            assert got == want, (a, b)


@pytest.mark.parametrize("N", [1, 3])
def test_cpn_pairing(N):
    s = small_theory(cpn(N), 6)
    G = s.pairing
    for d in range(7):
        for a in range(N + 1):
            for b in range(N + 1):
                want = int(a + b <= N) if d == 0 else 1
                assert G[(d,)][a, b] == want


def test_degree_zero_shift_is_the_picard_matrix():
    t = preset("fl3")
    s = small_theory(t, 2)
    for i in range(2):
        A0 = s.shift.A[i][(0, 0)]
        assert A0.map(lambda x: x.constant_value(), Fraction(0)) == t.picard_matrices[i]


def test_fl3_matches_printed_matrices(fl3_small):
    A1, A2 = printed_fl3_matrices()
    assert series_to_sympy(fl3_small.shift.A_com[0], [Q1, Q2]) == A1
    assert series_to_sympy(fl3_small.shift.A_com[1], [Q1, Q2]) == A2


def _printed_products(cutoff=6):
    """Omega_alpha = [f_beta(A) Phi_alpha] [f_beta(A) Phi_0]^{-1} from the printed A_1, A_2."""
    A1, A2 = printed_fl3_matrices()
    x1, x2 = sympy.symbols("x1 x2")
    gens = printed("fl3.generators")["expected"]
    polys = [sympy.Poly(sympy.sympify(g, locals={"x1": x1, "x2": x2, "Q1": Q1, "Q2": Q2}), x1, x2)
             for g in gens]

    def at(p):
        out = sympy.zeros(6)
        for (i, j), c in zip(p.monoms(), p.coeffs()):
            out += c * A1 ** i * A2 ** j
        return out

    F = [at(p) for p in polys]
    e = [sympy.eye(6)[:, k] for k in range(6)]
    B = sympy.Matrix.hstack(*[F[b] * e[0] for b in range(6)])
    assert B.subs({Q1: 0, Q2: 0}) == sympy.eye(6)
    # B - 1 has positive Q-degree, so a Neumann series truncated at the cutoff inverts B
    N = sympy.eye(6) - B
    Binv, power = sympy.eye(6), sympy.eye(6)
    for _ in range(cutoff):
        power = _truncate(power * N, cutoff)
        Binv += power
    return [_truncate(sympy.Matrix.hstack(*[F[b] * e[a] for b in range(6)]) * Binv, cutoff)
            for a in range(6)]


def _truncate(M, cutoff):
    def cut(x):
        p = sympy.Poly(sympy.expand(x), Q1, Q2)
        return sum((c * Q1 ** i * Q2 ** j for (i, j), c in p.terms() if i + j <= cutoff),
                   sympy.Integer(0))
    return M.applyfunc(cut)


def test_fl3_products_match_the_printed_operators(fl3_small):
    want = _printed_products()
    for a in range(6):
        got = series_to_sympy(fl3_small.products[a], [Q1, Q2])
        assert (got - want[a]).expand() == sympy.zeros(6), a
    # Phi_1 * Phi_1 = Phi_2 + Q1 (Phi_0 - Phi_3)
    assert list(want[1][:, 1]) == [Q1, 0, 1, -Q1, 0, 0]


def test_fl3_oracle_products_are_polynomials_of_degree_two():
    top = 0
    for M in _printed_products():
        for x in M:
            p = sympy.Poly(sympy.expand(x), Q1, Q2)
            top = max(top, p.total_degree())
    assert top == 2


def test_fl3_pairing_is_symmetric(fl3_small):
    for d, m in fl3_small.pairing.items():
        assert m == m.transpose()


# -- relations, finiteness, semisimplicity ---------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 5])
def test_cpn_relation(N):
    s = small_theory(cpn(N), 8).shift
    assert check_relation(s, "(1-a)^%d - Q" % (N + 1))
    assert not check_relation(s, "(1-a)^%d" % (N + 1))


def test_fl3_relations(fl3_small):
    assert check_relation(fl3_small.shift, "(1-a1)^3 - Q1*(1-a1*a2)")
    assert check_relation(fl3_small.shift, "(1-a2)^3 - Q2*(1-a1*a2)")


def test_fl3_relations_hold_for_the_printed_matrices():
    A1, A2 = printed_fl3_matrices()
    I = sympy.eye(6)
    e0 = I[:, 0]
    for A, Q in ((A1, Q1), (A2, Q2)):
        R = (I - A) ** 3 - Q * (I - A1 * A2)
        assert sympy.expand(R * e0) == sympy.zeros(6, 1)
    assert (A1 * A2 - A2 * A1).expand() == sympy.zeros(6)


def test_relation_residual_names_the_failing_degree():
    s = small_theory(cpn(1), 3).shift
    assert relation_series(s, "(1-a)^2") == {(1,): [1, 0]}
    assert relation_series(s, "(1-x)^2 - R", names=["x", "R"]) == {}


def test_cp2_products_are_at_most_linear_in_Q():
    t = cpn(2)
    s = small_theory(t, 6)
    rep = finiteness_report(s.shift, t, products=s.products)
    assert rep.overall() == 1 and rep.stable


def test_fl3_finiteness(fl3_small):
    rep = finiteness_report(fl3_small.shift, fl3_small.target, products=fl3_small.products)
    assert rep.overall() == 2 and rep.stable
    assert len(rep.max_degree) == 21


def test_cutoff_zero_is_classical():
    t = preset("fl3")
    s = small_theory(t, 0)
    rep = finiteness_report(s.shift, t)
    assert rep.overall() == 0
    for a in range(6):
        assert s.products[a][(0, 0)] == t.mult_matrices[a]


def test_cp2_semisimple_at_one():
    s = small_theory(cpn(2), 4).shift
    (entry,) = semisimplicity_probe(s, [(1,)])
    oracle = sympy.Poly((cpn_matrix(2, 1)).charpoly(X).as_expr(), X)
    assert entry.charpoly == [Fraction(int(c)) for c in reversed(oracle.all_coeffs())]
    assert entry.squarefree
    assert sympy.expand(oracle.as_expr() + ((1 - X) ** 3 - 1)) == 0


def test_classical_limit_is_never_semisimple():
    for name in ("cp2", "fl3"):
        t = preset(name)
        s = small_theory(t, 2).shift
        entries = semisimplicity_probe(s, [(0,) * t.picard_rank])
        for e in entries:
            assert not e.squarefree
        assert not any(semisimple_verdict(entries).values())


def test_fl3_semisimplicity_at_one(fl3_small):
    A1, A2 = printed_fl3_matrices()
    at_one = {Q1: 1, Q2: 1}
    single = A1.subs(at_one).charpoly(X).as_expr()
    assert sympy.gcd(single, sympy.diff(single, X)) != 1
    combo = (A1 + 2 * A2).subs(at_one).charpoly(X).as_expr()
    assert sympy.gcd(combo, sympy.diff(combo, X)) == 1
    entries = semisimplicity_probe(fl3_small.shift, [(1, 1)])
    witness = [e for e in entries if e.squarefree]
    assert witness and witness[0].weights == (1, 2)
    oracle = sympy.Poly(combo, X)
    assert witness[0].charpoly == [Fraction(int(c)) for c in reversed(oracle.all_coeffs())]
    assert semisimple_verdict(entries) == {(1, 1): True}


@pytest.mark.parametrize("name,cutoff", [("cp1", 6), ("cp3", 5), ("cp5", 4), ("fl3", 4)])
def test_small_layer_invariants(name, cutoff):
    rep = run_small_checks(small_theory(preset(name), cutoff), name)
    assert rep.ok, rep.failures()


def test_t_vanishes_at_infinity_away_from_degree_zero(fl3_small):
    for d, m in fl3_small.factorization.T.items():
        if any(d):
            assert all(x.is_proper() for _, _, x in m.entries())


def test_a_degree_bounds_for_fl3(fl3_small):
    for i, A in enumerate(fl3_small.shift.A):
        for d in degrees_upto(2, 6):
            m = A.get(d)
            if m is None or not any(d):
                continue
            for _, _, x in m.entries():
                if x.is_zero():
                    continue
                assert d[i] > 0 and x.valuation >= 0 and x.degree <= d[i] - 1
