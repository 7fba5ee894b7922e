"""The t = 0 layer of the reconstruction.

From the small J-function we build the matrix M whose columns are
F_alpha(P^{-1} q^{Q d/dQ}) J / (1 - q), factor M = T U with T proper in q and
U Laurent, and read off the shift operators A_i, the small quantum products
and the pairing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NotLaurent, QDependentPairing, SplitLeavesResidue
from .exprparse import parse_polynomial
from .linalg import Mat, charpoly, poly_gcd_is_constant
from .novikov import (NovikovSeries, degrees_upto, identity_series, invert_matrix_series,
                      splittings)
from .scalarq import QLaurent, QRat, as_rational, split_laurent_proper
from .target import Target


@dataclass
class FactorizationResult:
    T: NovikovSeries        # Mat over QRat
    U: NovikovSeries        # Mat over QLaurent
    M: NovikovSeries = None


@dataclass
class SmallShift:
    A: list                 # per Picard index, NovikovSeries of Mat over QLaurent
    A_com: list             # same at q = 1, Mat over Fraction
    cutoff: int = 0
    target: Target = field(default=None, repr=False)


def _zero_q():
    return QRat.coerce(0)


def build_M(t: Target, cutoff: int, J=None) -> NovikovSeries:
    """Column alpha at Q^d: sum_e c_e q^{e.d} prod_i P_i^{-e_i} J_d / (1 - q)."""
    n, r = t.rank, t.picard_rank
    inv_one_minus_q = QRat.one_over(1)
    pinv = t.picard_matrices
    mono_cache = {}

    def mono_matrix(e):
        if e not in mono_cache:
            m = Mat.identity(n)
            for i, k in enumerate(e):
                for _ in range(k):
                    m = m.matmul(pinv[i])
            mono_cache[e] = m
        return mono_cache[e]

    out = {}
    for d in degrees_upto(r, cutoff):
        Jd = J[d] if J is not None else t.j_coefficient(d)
        v = [x * inv_one_minus_q for x in Jd]
        cols = []
        for alpha in range(n):
            acc = [[] for _ in range(n)]
            for e, c in t.basis_monomials[alpha].items():
                shift = sum(ei * di for ei, di in zip(e, d))
                P = mono_matrix(e)
                for i in range(n):
                    for j in range(n):
                        if P[i, j] and v[j]:
                            acc[i].append(v[j].shift(shift) * (P[i, j] * c))
            cols.append([QRat.sum_of(a) for a in acc])
        out[d] = Mat.from_columns(cols, _zero_q())
    return NovikovSeries(out, r, cutoff)


def birkhoff_factorize(M: NovikovSeries) -> FactorizationResult:
    r, cutoff = M.r, M.cutoff
    d0 = (0,) * r
    M0 = M[d0]
    if M0 is None or not M0.is_identity():
        raise SplitLeavesResidue("degree-0 term of M must be the identity")
    n = M0.nrows
    T = {d0: Mat.identity(n, QRat.coerce(1), _zero_q())}
    U = {d0: Mat.identity(n, QLaurent.constant(1), QLaurent())}
    for d in degrees_upto(r, cutoff):
        if d == d0:
            continue
        Md = M.get(d)
        rows = [[[] for _ in range(n)] for _ in range(n)]
        if Md is not None:
            for i, j, x in Md.entries():
                if x:
                    rows[i][j].append((x, QRat.coerce(1)))
        for d1, d2 in splittings(d):
            if not any(d1) or not any(d2):
                continue
            a, b = T.get(d1), U.get(d2)
            if a is None or b is None:
                continue
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        if a[i, k] and b[k, j]:
                            rows[i][j].append((-a[i, k], b[k, j]))
        Td, Ud = [], []
        for i in range(n):
            trow, urow = [], []
            for j in range(n):
                R = QRat.dot(rows[i][j])
                lau, prop = split_laurent_proper(R)
                trow.append(prop)
                urow.append(lau)
            Td.append(trow)
            Ud.append(urow)
        Td, Ud = Mat(Td, _zero_q()), Mat(Ud, QLaurent())
        if not Td.is_zero():
            T[d] = Td
        if not Ud.is_zero():
            U[d] = Ud
    return FactorizationResult(NovikovSeries(T, r, cutoff), NovikovSeries(U, r, cutoff), M)


def small_shift_operators(f: FactorizationResult, t: Target) -> SmallShift:
    """A_i from T A_i = P_i^{-1} T(q Q_i), solved degree by degree.

    Equivalent to T^{-1} P_i^{-1} qshift_i(T) without forming T^{-1}.
    """
    T = f.T
    r, cutoff = T.r, T.cutoff
    n = t.rank
    d0 = (0,) * r
    A_all, A_com = [], []
    for i in range(r):
        P = t.picard_matrices[i]
        Pq = P.map(QRat.coerce, _zero_q())
        A = {d0: P.map(QLaurent.constant, QLaurent())}
        for d in degrees_upto(r, cutoff):
            if d == d0:
                continue
            Td = T.get(d)
            pairs = [[[] for _ in range(n)] for _ in range(n)]
            if Td is not None:
                shifted = Td.qshift(d[i])
                for a in range(n):
                    for b in range(n):
                        for k in range(n):
                            if Pq[a, k] and shifted[k, b]:
                                pairs[a][b].append((Pq[a, k], shifted[k, b]))
                            if Td[a, k] and P[k, b]:
                                pairs[a][b].append((-Td[a, k], P[k, b]))
            for d1, d2 in splittings(d):
                if not any(d1) or not any(d2):
                    continue
                a_, b_ = T.get(d1), A.get(d2)
                if a_ is None or b_ is None:
                    continue
                for a in range(n):
                    for b in range(n):
                        for k in range(n):
                            if a_[a, k] and b_[k, b]:
                                pairs[a][b].append((-a_[a, k], b_[k, b]))
            rows = []
            for a in range(n):
                row = []
                for b in range(n):
                    val = QRat.dot(pairs[a][b])
                    lp = val.as_laurent()
                    if lp is None:
                        raise NotLaurent("A_%d at degree %s entry (%d,%d) has a pole: %s"
                                         % (i + 1, d, a, b, val), location=(i, d, a, b))
                    row.append(lp)
                rows.append(row)
            Ad = Mat(rows, QLaurent())
            if not Ad.is_zero():
                A[d] = Ad
        series = NovikovSeries(A, r, cutoff)
        A_all.append(series)
        A_com.append(series.map(lambda m: m.map(lambda x: x.eval(1), Fraction(0))))
    return SmallShift(A_all, A_com, cutoff, t)


# ---------------------------------------------------------------------------
# products from commuting operators
# ---------------------------------------------------------------------------


def eval_poly_on_series(poly, series, n, r, cutoff, one=Fraction(1), zero=Fraction(0)):
    """sum_e c_e prod_i series[i]^{e_i} for matrix-valued series."""
    ident = identity_series(n, r, cutoff, one, zero)
    powers = {}

    def pw(i, k):
        if (i, k) not in powers:
            powers[(i, k)] = ident if k == 0 else pw(i, k - 1) * series[i]
        return powers[(i, k)]

    out = None
    for e, c in sorted(poly.items()):
        term = ident
        for i, k in enumerate(e):
            if k:
                term = term * pw(i, k)
        term = term.scale(c) if c != 1 else term
        out = term if out is None else out + term
    return out


def products_from_commuting(A_com, t: Target, one=Fraction(1), zero=Fraction(0)):
    """Omega_alpha = [F_beta(A) Phi_alpha]_beta [F_beta(A) Phi_0]_beta^{-1}."""
    n, r = t.rank, t.picard_rank
    cutoff = A_com[0].cutoff
    FA = [eval_poly_on_series(t.basis_monomials[b], A_com, n, r, cutoff, one, zero)
          for b in range(n)]
    degrees = sorted(set(d for s in FA for d in s.degrees()), key=lambda d: (sum(d), d))

    def column_matrix(alpha):
        out = {}
        for d in degrees:
            cols = []
            for b in range(n):
                m = FA[b].get(d)
                cols.append(m.column(alpha) if m is not None else [zero] * n)
            out[d] = Mat.from_columns(cols, zero)
        return NovikovSeries(out, r, cutoff)

    Binv = invert_matrix_series(column_matrix(0))
    return [column_matrix(a) * Binv for a in range(n)]


def small_products(s: SmallShift, t: Target):
    return products_from_commuting(s.A_com, t)


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------


def small_pairing(f: FactorizationResult, t: Target) -> NovikovSeries:
    """G_d = sum_{d'+d''=d} bar(T_{d'})^T g T_{d''}, required to be q-free."""
    T = f.T
    r, cutoff, n = T.r, T.cutoff, t.rank
    g = t.g_matrix
    W = {}
    for d, Td in T.items():
        bt = Td.bar().transpose()
        W[d] = Mat([[QRat.sum_of([bt[a, k] * g[k, b] for k in range(n) if g[k, b] and bt[a, k]])
                     for b in range(n)] for a in range(n)], _zero_q())
    out = {}
    for d in degrees_upto(r, cutoff):
        pairs = [[[] for _ in range(n)] for _ in range(n)]
        for d1, d2 in splittings(d):
            a_, b_ = W.get(d1), T.get(d2)
            if a_ is None or b_ is None:
                continue
            for a in range(n):
                for b in range(n):
                    for k in range(n):
                        if a_[a, k] and b_[k, b]:
                            pairs[a][b].append((a_[a, k], b_[k, b]))
        rows = []
        for a in range(n):
            row = []
            for b in range(n):
                val = QRat.dot(pairs[a][b])
                if not val.is_constant():
                    raise QDependentPairing("G at degree %s entry (%d,%d) depends on q: %s"
                                            % (d, a, b, val), location=(d, a, b))
                row.append(val.constant_value())
            rows.append(row)
        Gd = Mat(rows, Fraction(0))
        if not Gd.is_zero():
            out[d] = Gd
    return NovikovSeries(out, r, cutoff)


# ---------------------------------------------------------------------------
# relations, finiteness, semisimplicity
# ---------------------------------------------------------------------------


def relation_series(s: SmallShift, expr: str, names=None):
    """The polynomial evaluated on A_com and applied to Phi_0, as {degree: vector}.

    ``names`` overrides the variable names: r names for the operators
    followed by r names for the Novikov variables.
    """
    t = s.target
    n, r = t.rank, t.picard_rank
    if names is not None:
        if len(names) != 2 * r:
            raise ValueError("need %d variable names" % (2 * r))
        names = list(names)
        if r == 1:
            names = [names[0], names[1], names[0] + "_", names[1] + "_"]
    elif r == 1:
        names = ["a", "Q", "a1", "Q1"]
    else:
        names = ["a%d" % (i + 1) for i in range(r)] + ["Q%d" % (i + 1) for i in range(r)]
    poly = parse_polynomial(expr, names)
    cutoff = s.cutoff
    terms = {}
    for e, c in poly.terms.items():
        if r == 1:
            ea, eq = (e[0] + e[2],), (e[1] + e[3],)
        else:
            ea, eq = e[:r], e[r:]
        terms.setdefault(eq, {})
        terms[eq][ea] = terms[eq].get(ea, Fraction(0)) + c
    total = {}
    for eq, apoly in terms.items():
        val = eval_poly_on_series(apoly, s.A_com, n, r, cutoff)
        for d, m in val.items():
            dd = tuple(x + y for x, y in zip(d, eq))
            if sum(dd) > cutoff:
                continue
            col = m.column(0)
            if dd in total:
                total[dd] = [x + y for x, y in zip(total[dd], col)]
            else:
                total[dd] = col
    return {d: v for d, v in total.items() if any(v)}


def check_relation(s: SmallShift, expr: str) -> bool:
    return not relation_series(s, expr)


@dataclass
class FinitenessReport:
    cutoff: int
    max_degree: dict        # (alpha, beta) -> max total degree of Phi_alpha * Phi_beta
    stable: bool

    def overall(self):
        return max(self.max_degree.values(), default=0)


def finiteness_report(s: SmallShift, t: Target, cutoff=None, products=None) -> FinitenessReport:
    products = products if products is not None else small_products(s, t)
    cutoff = s.cutoff if cutoff is None else cutoff
    n = t.rank
    out = {}
    for a in range(n):
        for b in range(a, n):
            top = 0
            for d, m in products[a].items():
                if any(m.column(b)):
                    top = max(top, sum(d))
            out[(a, b)] = top
    stable = all(v <= cutoff // 2 for v in out.values()) if cutoff else True
    return FinitenessReport(cutoff, out, stable)


@dataclass
class SemisimplicityEntry:
    specialization: tuple
    picard_index: int       # None for a combination of the A_{i,com}
    charpoly: list          # ascending coefficients
    squarefree: bool
    weights: tuple = None   # coefficients c_i of sum_i c_i A_{i,com}


def specialize(series: NovikovSeries, values):
    values = [as_rational(v) for v in values]
    out = None
    for d, m in series.items():
        w = Fraction(1)
        for x, k in zip(values, d):
            w *= x ** k
        if not w:
            continue
        term = m * w
        out = term if out is None else out + term
    return out


def _weight_vectors(r, bound):
    """Integer weights with entries 1..bound, smallest maximum entry first."""
    import itertools
    for top in range(1, bound + 1):
        for w in itertools.product(range(1, top + 1), repeat=r):
            if max(w) == top:
                yield w


def semisimplicity_probe(s: SmallShift, q_values, weight_bound=4):
    """Charpoly of each A_{i,com} at the given Novikov specialisations.

    When no single A_{i,com} has a squarefree charpoly and r > 1, the first
    combination sum_i c_i A_{i,com} (c_i in 1..weight_bound) that does is
    reported as an additional entry with picard_index None. The commuting
    family is semisimple exactly when such a combination exists.
    """
    report = []
    for vals in q_values:
        vals = tuple(as_rational(v) for v in (vals if isinstance(vals, (list, tuple)) else [vals]))
        mats = [specialize(A, vals) for A in s.A_com]
        found = False
        for i, M in enumerate(mats):
            cp = charpoly(M)
            sf = poly_gcd_is_constant(cp)
            found |= sf
            report.append(SemisimplicityEntry(vals, i, cp, sf, tuple(int(j == i) for j in range(len(mats)))))
        if found or len(mats) < 2:
            continue
        for w in _weight_vectors(len(mats), weight_bound):
            M = mats[0] * w[0]
            for c, m in zip(w[1:], mats[1:]):
                M = M + m * c
            cp = charpoly(M)
            if poly_gcd_is_constant(cp):
                report.append(SemisimplicityEntry(vals, None, cp, True, w))
                break
    return report


def semisimple_verdict(entries):
    """{specialization: True} when some reported operator has a squarefree charpoly."""
    out = {}
    for e in entries:
        out[e.specialization] = out.get(e.specialization, False) or e.squarefree
    return out


# ---------------------------------------------------------------------------
# convenience bundle
# ---------------------------------------------------------------------------


@dataclass
class SmallTheory:
    target: Target
    cutoff: int
    factorization: FactorizationResult
    shift: SmallShift
    _products: list = None
    _pairing: NovikovSeries = None

    @property
    def products(self):
        if self._products is None:
            self._products = small_products(self.shift, self.target)
        return self._products

    @property
    def pairing(self):
        if self._pairing is None:
            self._pairing = small_pairing(self.factorization, self.target)
        return self._pairing


def small_theory(t: Target, cutoff: int) -> SmallTheory:
    M = build_M(t, cutoff)
    f = birkhoff_factorize(M)
    s = small_shift_operators(f, t)
    return SmallTheory(t, cutoff, f, s)
