"""Structural invariants of a reconstructed theory, collected into one report.

Every check recomputes its identity from stored data instead of trusting the
construction, so a corrupted state is caught even when the pipeline that
produced it is wrong.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .bigrec import TheoryState, _qrat_coeffs, _scale, extract_invariants, lax_residual, lift
from .exppoly import ExpPoly
from .novikov import NovikovSeries, degrees_upto, identity_series
from .scalarq import QLaurent, QRat
from .smallrec import SmallTheory


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class CheckReport:
    target: str
    cutoff: int
    results: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.ok for r in self.results)

    def add(self, name, ok, detail=""):
        self.results.append(CheckResult(name, bool(ok), detail))

    def failures(self):
        return [r for r in self.results if not r.ok]


def _first_bad(pairs):
    for where, good in pairs:
        if not good:
            return where
    return None


def _verdict(report, name, pairs):
    bad = _first_bad(pairs)
    report.add(name, bad is None, "" if bad is None else "first failure at %s" % (bad,))


# ---------------------------------------------------------------------------
# t = 0 layer
# ---------------------------------------------------------------------------


def check_factorization(small: SmallTheory, report: CheckReport):
    f = small.factorization
    TU = f.T * f.U.map(lambda m: m.map(QRat.coerce, QRat.coerce(0)))
    _verdict(report, "M = T U", ((d, TU.get(d) == f.M.get(d) or
                                  (TU.get(d) is None and f.M[d].is_zero()) or
                                  (f.M.get(d) is None and TU[d].is_zero()))
                                 for d in degrees_upto(f.M.r, f.M.cutoff)))
    _verdict(report, "T proper away from degree 0",
             ((d, all(x.is_proper() for _, _, x in Td.entries()))
              for d, Td in f.T.items() if any(d)))


def check_a_expansion_bounds(small: SmallTheory, report: CheckReport):
    pairs = []
    for i, A in enumerate(small.shift.A):
        for d, Ad in A.items():
            if not any(d):
                continue
            for _, _, x in Ad.entries():
                if x.is_zero():
                    continue
                if d[i] == 0:
                    pairs.append(((i, d), False))
                else:
                    pairs.append(((i, d), x.valuation >= 0 and x.degree <= d[i] - 1))
    _verdict(report, "A q-degree bounds", pairs)


def _commutator_zero(a: NovikovSeries, b: NovikovSeries):
    return (a * b - b * a).is_zero()


def check_small_commuting(small: SmallTheory, report: CheckReport):
    A = small.shift.A_com
    om = small.products
    pairs = [(("A", i, j), _commutator_zero(A[i], A[j]))
             for i in range(len(A)) for j in range(i + 1, len(A))]
    pairs += [(("Omega", i, a), _commutator_zero(A[i], om[a]))
              for i in range(len(A)) for a in range(len(om))]
    _verdict(report, "small commutators vanish", pairs)


def check_small_unit(small: SmallTheory, report: CheckReport):
    n = small.target.rank
    pairs = []
    for a, series in enumerate(small.products):
        for d in degrees_upto(series.r, series.cutoff):
            m = series.get(d)
            col = m.column(0) if m is not None else [Fraction(0)] * n
            want = [Fraction(int(b == a and not any(d))) for b in range(n)]
            pairs.append(((a, d), list(col) == want))
    _verdict(report, "Omega_alpha Phi_0 = Phi_alpha", pairs)


def _frobenius_pairs(G: NovikovSeries, omegas):
    out = []
    for a, om in enumerate(omegas):
        tr = om.map(lambda m: m.transpose())
        out.append((a, (tr * G - G * om).is_zero()))
    return out


def check_small_frobenius(small: SmallTheory, report: CheckReport):
    _verdict(report, "small Frobenius identity", _frobenius_pairs(small.pairing, small.products))


# ---------------------------------------------------------------------------
# t-dependent layer
# ---------------------------------------------------------------------------


def _all_entries(state: TheoryState):
    for i, per in enumerate(state.big_shift.A):
        for d, layers in per.items():
            for k, m in enumerate(layers):
                for _, _, x in m.entries():
                    yield ("A", i, d, k), x
    for a, series in enumerate(state.big_products.omega):
        for d, m in series.items():
            for _, _, x in m.entries():
                yield ("Omega", a, d), x


def check_exppoly_membership(state: TheoryState, report: CheckReport):
    pairs = [(where, isinstance(x, ExpPoly) and x.has_integral_exponents())
             for where, x in _all_entries(state)]
    _verdict(report, "structure constants are exponential polynomials", pairs)
    pairs = [(where, not x.depends_on(0)) for where, x in _all_entries(state)]
    _verdict(report, "A and Omega independent of t^0", pairs)


def check_restriction(state: TheoryState, report: CheckReport):
    pairs = []
    for i, A in enumerate(state.small.shift.A):
        for d in degrees_upto(A.r, state.cutoff):
            small = A.get(d)
            big = state.big_shift.at_zero(i, d)
            if small is None or big is None:
                pairs.append(((i, d), (small is None or small.is_zero()) and
                              (big is None or big.is_zero())))
            else:
                pairs.append(((i, d), small == big))
    _verdict(report, "big A at t = 0 equals small A", pairs)


def check_lax(state: TheoryState, report: CheckReport):
    rep = lax_residual(state)
    report.add("Lax residual and shift commutators", rep.ok,
               "%d identities checked" % rep.checked if rep.ok else "failures %s" % rep.failures[:3])


def _omega_series(state, alpha):
    return state.big_products.omega[alpha]


def check_big_commutative(state: TheoryState, report: CheckReport):
    n = state.target.rank
    pairs = [((a, b), _commutator_zero(_omega_series(state, a), _omega_series(state, b)))
             for a in range(1, n) for b in range(a + 1, n)]
    _verdict(report, "Omega_alpha commute", pairs)


def _qrat_series(series: NovikovSeries, nv):
    return series.map(lambda m: _qrat_coeffs(m, nv) if m.rows and isinstance(m[0, 0], ExpPoly)
                      else lift(m, nv))


def check_T_equations(state: TheoryState, report: CheckReport):
    t = state.target
    n, r, nv, cutoff = t.rank, t.picard_rank, state.nvars, state.cutoff
    T = state.T_big
    one_minus_q = QRat(QLaurent({0: 1, 1: -1}))
    pairs = []
    for alpha in range(1, n):
        lhs = T.map(lambda m: _scale(m.map(lambda x: x.differentiate(alpha), m.zero), one_minus_q))
        rhs = T * _qrat_series(_omega_series(state, alpha), nv)
        pairs.append((("d", alpha), (lhs - rhs).is_zero()))
    for i in range(r):
        P = lift(t.picard_matrices[i], nv)
        shifted = T.map(lambda m: m).qshift(i)
        lhs = shifted.map(lambda m: P.matmul(m))
        A = {}
        for d in degrees_upto(r, cutoff):
            m = state.big_shift.at_q(i, d) if any(d) else None
            if not any(d):
                m = lift(t.picard_matrices[i], nv)
            if m is not None:
                A[d] = _qrat_coeffs(m, nv)
        rhs = T * NovikovSeries(A, r, cutoff)
        pairs.append((("shift", i), (lhs - rhs).is_zero()))
    _verdict(report, "T equations", pairs)


def check_unitarity(state: TheoryState, report: CheckReport):
    t = state.target
    n, r, nv, cutoff = t.rank, t.picard_rank, state.nvars, state.cutoff
    prod = state.S_big * state.T_big
    ident = identity_series(n, r, cutoff, ExpPoly.constant(QRat.coerce(1), nv), ExpPoly.zero(nv))
    report.add("S T = identity", (prod - ident).is_zero())


def check_pairing(state: TheoryState, report: CheckReport):
    t = state.target
    G = state.G_big
    pairs = []
    for d, Gd in G.items():
        pairs.append((("symmetric", d), Gd == Gd.transpose()))
        pairs.append((("q-free", d), all(not isinstance(c, (QRat, QLaurent))
                                         for _, _, x in Gd.entries() for _, c in x.items())))
    d0 = (0,) * t.picard_rank
    G0 = G[d0].map(lambda x: x.eval_all_zero(), Fraction(0))
    pairs.append(("G(0) = g", G0 == t.g_matrix))
    _verdict(report, "pairing G", pairs)


def check_big_frobenius(state: TheoryState, report: CheckReport):
    omegas = [_omega_series(state, a) for a in range(state.target.rank)]
    _verdict(report, "Frobenius identity", _frobenius_pairs(state.G_big, omegas))


def integrality_pairs(state: TheoryState, max_points=4):
    """Every <Phi_a1, ..., Phi_ak>_{0,k,d} with k <= max_points has to be an integer."""
    t = state.target
    n = t.rank
    for d in degrees_upto(t.picard_rank, state.cutoff):
        Fd = state.F.get(d)
        if Fd is None:
            continue
        for k in range(max_points + 1):
            for combo in itertools.combinations_with_replacement(range(n), k):
                orders = [combo.count(a) for a in range(n)]
                v = Fd.taylor_derivative(orders)
                v = v if isinstance(v, Fraction) else Fraction(v)
                yield (d, combo), v.denominator == 1


def check_integrality(state: TheoryState, report: CheckReport, max_points=4):
    _verdict(report, "invariants with basis insertions are integers",
             integrality_pairs(state, max_points))


# Counts of rational curves through 3d - 1 points, which the K-theoretic
# point invariants of CP^2 reproduce in low degree.
CP2_POINT_COUNTS = {1: 1, 2: 1, 3: 12}


def check_cp2_point_counts(state: TheoryState, report: CheckReport):
    pairs = []
    for d, want in CP2_POINT_COUNTS.items():
        if d <= state.cutoff:
            got = extract_invariants(state, [("pt", 3 * d - 1)], (d,))
            pairs.append((d, got == want))
    _verdict(report, "CP^2 point invariants", pairs)


SMALL_CHECKS = (check_factorization, check_a_expansion_bounds, check_small_commuting,
                check_small_unit, check_small_frobenius)
BIG_CHECKS = (check_exppoly_membership, check_restriction, check_lax, check_big_commutative,
              check_T_equations, check_unitarity, check_pairing, check_big_frobenius,
              check_integrality)


def run_small_checks(small: SmallTheory, name="", report=None) -> CheckReport:
    report = report or CheckReport(name, small.cutoff)
    for fn in SMALL_CHECKS:
        fn(small, report)
    return report


def run_checks(state: TheoryState, name="") -> CheckReport:
    report = CheckReport(name or state.target.preset or state.target.name, state.cutoff)
    run_small_checks(state.small, report=report)
    for fn in BIG_CHECKS:
        fn(state, report)
    if state.target.preset == "cpn:2":
        check_cp2_point_counts(state, report)
    return report
