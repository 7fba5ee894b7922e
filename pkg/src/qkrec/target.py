"""Finite models of target spaces.

A ``Target`` fixes a basis Phi_0..Phi_N of K(X) with Phi_0 = 1, the classical
structure constants, the matrices of multiplication by P_i^{-1}, the Euler
characteristic on the basis, monomials F_alpha(x) with F_alpha(P^{-1}) = Phi_alpha,
and a provider for the t = 0 J-function coefficients.

Presets: ``cpn:N`` (basis (1 - P^{-1})^alpha) and ``fl3`` (basis 1, y1, y1^2,
y2, y2^2, y1 y2 with y_i = 1 - P_i^{-1}).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable

from .errors import IdentityNotPreserved, NotAvailable, SingularBasisChange, ValidationFailure
from .linalg import Mat
from .scalarq import QLaurent, QRat, as_rational, format_rational


def _vec_add(a, b, s=1):
    return [x + s * y for x, y in zip(a, b)]


@dataclass(frozen=True)
class Target:
    name: str
    rank: int
    picard_rank: int
    basis_labels: tuple
    mult_table: tuple              # mult_table[a][b] = coefficient list over gamma
    picard_matrices: tuple         # Mat of multiplication by P_i^{-1}
    chi: tuple
    basis_monomials: tuple         # tuple of {exponent tuple: Fraction}
    j_provider: Callable = field(compare=False, repr=False, default=None)
    aliases: dict = field(compare=False, default_factory=dict)
    preset: str = None
    _cache: dict = field(compare=False, repr=False, default_factory=dict)

    # -- classical ring -------------------------------------------------
    def unit(self, a):
        v = [Fraction(0)] * self.rank
        v[a] = Fraction(1)
        return v

    def classical_mul(self, a, b):
        out = [Fraction(0)] * self.rank
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if not y:
                    continue
                xy = x * y
                for g, c in enumerate(self.mult_table[i][j]):
                    if c:
                        out[g] += xy * c
        return out

    def mult_matrix_of(self, v):
        """Matrix of classical multiplication by the class v (column beta = v * Phi_beta)."""
        cols = [self.classical_mul(v, self.unit(b)) for b in range(self.rank)]
        return Mat.from_columns(cols, Fraction(0))

    @property
    def mult_matrices(self):
        """Omega_{alpha,0}: classical multiplication by Phi_alpha."""
        if "mult" not in self._cache:
            self._cache["mult"] = tuple(self.mult_matrix_of(self.unit(a)) for a in range(self.rank))
        return self._cache["mult"]

    def chi_of(self, v):
        return sum((x * c for x, c in zip(v, self.chi)), Fraction(0))

    def pairing_g(self, a, b):
        return self.chi_of(self.classical_mul(a, b))

    @property
    def g_matrix(self):
        if "g" not in self._cache:
            self._cache["g"] = Mat([[self.pairing_g(self.unit(a), self.unit(b))
                                     for b in range(self.rank)] for a in range(self.rank)],
                                   Fraction(0))
        return self._cache["g"]

    # -- J-function -------------------------------------------------------
    def j_coefficient(self, d):
        d = tuple(d)
        if self.j_provider is None:
            raise NotAvailable("target %s has no J-function data" % self.name)
        return self.j_provider(d)

    def eval_monomial(self, alpha, mats):
        """F_alpha evaluated on commuting matrices ``mats`` (any ring Mat)."""
        return eval_polynomial(self.basis_monomials[alpha], mats)

    def class_vector(self, label):
        if label in self.aliases:
            return list(self.aliases[label])
        if label in self.basis_labels:
            return self.unit(self.basis_labels.index(label))
        raise KeyError("unknown class label %r for %s" % (label, self.name))

    def to_document(self, table_cutoff=None):
        mt = []
        for a in range(self.rank):
            for b in range(self.rank):
                for g, c in enumerate(self.mult_table[a][b]):
                    if c:
                        mt.append([a, b, g, format_rational(c)])
        doc = {
            "name": self.name,
            "rank": self.rank,
            "picard_rank": self.picard_rank,
            "basis_labels": list(self.basis_labels),
            "mult_table": mt,
            "picard_matrices": [[[format_rational(x) for x in row] for row in P.rows]
                                for P in self.picard_matrices],
            "chi": [format_rational(c) for c in self.chi],
            "basis_monomials": [[[list(e), format_rational(c)] for e, c in sorted(F.items())]
                                for F in self.basis_monomials],
        }
        if self.preset:
            doc["j"] = {"preset": self.preset}
        elif table_cutoff is not None:
            from .novikov import degrees_upto
            doc["j"] = {"table": [{"d": list(d), "coeffs": [c.to_json() for c in self.j_coefficient(d)]}
                                  for d in degrees_upto(self.picard_rank, table_cutoff)]}
        return doc


def eval_polynomial(poly, mats):
    """sum_e c_e prod_i mats[i]^{e_i} for a dict {exponent tuple: coefficient}."""
    n = mats[0].nrows
    one = Mat.identity(n, _one_like(mats[0].zero), mats[0].zero)
    powers = {}

    def pw(i, k):
        if (i, k) not in powers:
            powers[(i, k)] = one if k == 0 else pw(i, k - 1).matmul(mats[i])
        return powers[(i, k)]

    out = None
    for e, c in sorted(poly.items()):
        term = one
        for i, k in enumerate(e):
            if k:
                term = term.matmul(pw(i, k))
        term = term * c if c != 1 else term
        out = term if out is None else out + term
    return out if out is not None else Mat.zeros(n, n, mats[0].zero)


def _one_like(zero):
    from .exppoly import ExpPoly
    if isinstance(zero, ExpPoly):
        return ExpPoly.constant(1, zero.nvars)
    if isinstance(zero, QRat):
        return QRat.coerce(1)
    if isinstance(zero, QLaurent):
        return QLaurent.constant(1)
    return Fraction(1)


def poly_from_terms(terms):
    out = {}
    for e, c in terms:
        e = tuple(int(x) for x in e)
        out[e] = out.get(e, Fraction(0)) + as_rational(c)
    return {e: c for e, c in out.items() if c}


def _binomial_poly(r, i, k, sign=-1):
    """(1 + sign*x_i)^k as an exponent dict in r variables."""
    out = {}
    for j in range(k + 1):
        e = [0] * r
        e[i] = j
        out[tuple(e)] = Fraction(math.comb(k, j) * sign ** j)
    return out


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return {e: c for e, c in out.items() if c}


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate(t: Target):
    n, r = t.rank, t.picard_rank

    def fail(invariant, msg):
        raise ValidationFailure("%s: %s" % (t.name, msg), invariant=invariant)

    if len(t.basis_labels) != n:
        fail("basis_labels", "expected %d labels" % n)
    if len(t.chi) != n:
        fail("chi", "chi has length %d, expected %d" % (len(t.chi), n))
    if len(t.mult_table) != n or any(len(row) != n for row in t.mult_table):
        fail("mult_table", "table is not rank x rank")
    if len(t.picard_matrices) != r:
        fail("picard_matrices", "expected %d matrices" % r)
    if len(t.basis_monomials) != n:
        fail("basis_monomials", "expected %d monomials" % n)
    e = [t.unit(a) for a in range(n)]
    for b in range(n):
        if t.classical_mul(e[0], e[b]) != e[b]:
            fail("identity", "Phi_0 does not act as the identity on Phi_%d" % b)
    for a in range(n):
        for b in range(n):
            if t.classical_mul(e[a], e[b]) != t.classical_mul(e[b], e[a]):
                fail("commutativity", "Phi_%d Phi_%d" % (a, b))
            ab = t.classical_mul(e[a], e[b])
            for c in range(n):
                if t.classical_mul(ab, e[c]) != t.classical_mul(e[a], t.classical_mul(e[b], e[c])):
                    fail("associativity", "(Phi_%d Phi_%d) Phi_%d" % (a, b, c))
    I = Mat.identity(n)
    for i, P in enumerate(t.picard_matrices):
        if (P.nrows, P.ncols) != (n, n):
            fail("picard_matrices", "matrix %d has wrong shape" % i)
        if P != t.mult_matrix_of(P.column(0)):
            fail("picard_matrices", "P_%d^{-1} is not a classical multiplication operator" % (i + 1))
        Nil = P - I
        power = Nil
        for _ in range(n - 1):
            power = power.matmul(Nil)
        if not power.is_zero():
            fail("nilpotence", "1 - P_%d^{-1} is not nilpotent" % (i + 1))
    for i in range(r):
        for j in range(r):
            if t.picard_matrices[i].matmul(t.picard_matrices[j]) != \
                    t.picard_matrices[j].matmul(t.picard_matrices[i]):
                fail("picard_matrices", "P^{-1} matrices do not commute")
    if tuple(t.basis_monomials[0].items()) != (((0,) * r, Fraction(1)),):
        fail("basis_monomials", "F_0 must be 1")
    for a in range(n):
        if any(len(k) != r for k in t.basis_monomials[a]):
            fail("basis_monomials", "F_%d has wrong arity" % a)
        col = t.eval_monomial(a, list(t.picard_matrices)).column(0)
        if col != e[a]:
            fail("basis_monomials", "F_%d(P^{-1}) != Phi_%d" % (a, a))
    g = t.g_matrix
    if g != g.transpose():
        fail("pairing", "g is not symmetric")
    try:
        g.inverse()
    except Exception:
        fail("pairing", "g is degenerate")
    return t


# ---------------------------------------------------------------------------
# J-function providers
# ---------------------------------------------------------------------------


def _apply_rat(M, v):
    """Rational matrix times a QRat vector."""
    out = []
    for row in M.rows:
        terms = [v[j] * c for j, c in enumerate(row) if c and v[j]]
        out.append(QRat.sum_of(terms))
    return out


def _factor_inverse(v, N, r):
    """(1 - q^r (I + N))^{-1} v = sum_k q^{rk} N^k v / (1 - q^r)^{k+1}."""
    out = [QRat.coerce(0)] * len(v)
    cur = v
    k = 0
    while any(cur):
        scale = QRat(QLaurent.monomial(r * k), ((r, k + 1),))
        out = [a + scale * b for a, b in zip(out, cur)]
        cur = _apply_rat(N, cur)
        k += 1
    return out


def _factor_apply(v, N, r):
    """(1 - q^r (I + N)) v = (1 - q^r) v - q^r N v."""
    Nv = _apply_rat(N, v)
    a = QRat(QLaurent({0: 1, r: -1}))
    b = QRat(QLaurent.monomial(r, -1))
    return [a * x + b * y for x, y in zip(v, Nv)]


def _cpn_provider(n_plus_1, pinv):
    N = pinv - Mat.identity(n_plus_1)
    one_minus_q = QRat(QLaurent({0: 1, 1: -1}))

    @lru_cache(maxsize=None)
    def hyper(d):
        if d == 0:
            v = [QRat.coerce(0)] * n_plus_1
            v[0] = QRat.coerce(1)
            return tuple(v)
        v = list(hyper(d - 1))
        for _ in range(n_plus_1):
            v = _factor_inverse(v, N, d)
        return tuple(v)

    def provider(d):
        (k,) = d
        return [one_minus_q * x for x in hyper(k)]

    return provider


def _fl3_provider(p1, p2):
    n = p1.nrows
    I = Mat.identity(n)
    N1, N2 = p1 - I, p2 - I
    N12 = p1.matmul(p2) - I
    one_minus_q = QRat(QLaurent({0: 1, 1: -1}))

    @lru_cache(maxsize=None)
    def provider_t(d):
        d1, d2 = d
        v = [QRat.coerce(0)] * n
        v[0] = QRat.coerce(1)
        for r in range(1, d1 + 1):
            for _ in range(3):
                v = _factor_inverse(v, N1, r)
        for r in range(1, d2 + 1):
            for _ in range(3):
                v = _factor_inverse(v, N2, r)
        for r in range(1, d1 + d2 + 1):
            v = _factor_apply(v, N12, r)
        return tuple(one_minus_q * x for x in v)

    return lambda d: list(provider_t(tuple(d)))


def _table_provider(table):
    def provider(d):
        d = tuple(d)
        if d not in table:
            raise NotAvailable("no J coefficient for degree %s" % (d,))
        return list(table[d])
    return provider


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def cpn(N: int) -> Target:
    """CP^N in the basis h^alpha, h = 1 - P^{-1}, with h^{N+1} = 0."""
    if N < 1:
        raise ValidationFailure("cpn:N needs N >= 1", invariant="preset")
    n = N + 1
    mult = tuple(tuple(tuple(Fraction(1) if (a + b == c) else Fraction(0) for c in range(n))
                       for b in range(n)) for a in range(n))
    # P^{-1} = 1 - h
    pinv = Mat([[Fraction(1) if i == j else (Fraction(-1) if i == j + 1 else Fraction(0))
                 for j in range(n)] for i in range(n)], Fraction(0))
    chi = tuple(Fraction(1) for _ in range(n))
    monos = tuple(_binomial_poly(1, 0, a) for a in range(n))
    labels = tuple(["1", "H"] + ["H^%d" % a for a in range(2, n)])
    aliases = {"pt": [Fraction(int(a == N)) for a in range(n)],
               "O": [Fraction(int(a == 0)) for a in range(n)],
               "P^-1": [Fraction(1), Fraction(-1)] + [Fraction(0)] * (n - 2)}
    t = Target("cpn:%d" % N, n, 1, labels, mult, (pinv,), chi, monos,
               _cpn_provider(n, pinv), aliases, "cpn:%d" % N)
    return validate(t)


def _fl3_mult():
    # basis: 1, y1, y1^2, y2, y2^2, y1 y2; monomial exponents (a, b) of y1^a y2^b
    basis = [(0, 0), (1, 0), (2, 0), (0, 1), (0, 2), (1, 1)]
    pt = {(2, 0): 1, (1, 1): -1, (0, 2): 1}

    def reduce(a, b):
        if (a, b) in basis:
            return {(a, b): 1}
        if a >= 3 or b >= 3 or a + b >= 4:
            return {}
        return dict(pt)           # y1^2 y2 = y1 y2^2 = y1^2 - y1 y2 + y2^2

    table = []
    for ea in basis:
        row = []
        for eb in basis:
            red = reduce(ea[0] + eb[0], ea[1] + eb[1])
            row.append(tuple(Fraction(red.get(e, 0)) for e in basis))
        table.append(tuple(row))
    return tuple(table), basis


@lru_cache(maxsize=None)
def fl3() -> Target:
    """Complete flags in C^3."""
    mult, basis = _fl3_mult()
    n = 6
    units = [[Fraction(int(i == a)) for i in range(n)] for a in range(n)]

    def mult_by(v):
        cols = []
        for b in range(n):
            out = [Fraction(0)] * n
            for a, x in enumerate(v):
                for g, c in enumerate(mult[a][b]):
                    out[g] += x * c
            cols.append(out)
        return Mat.from_columns(cols, Fraction(0))

    p1 = mult_by(_vec_add(units[0], units[1], -1))
    p2 = mult_by(_vec_add(units[0], units[3], -1))
    chi = tuple(Fraction(1) for _ in range(n))       # from the Weyl dimension formula
    y1, y2 = _binomial_poly(2, 0, 1), _binomial_poly(2, 1, 1)
    monos = ({(0, 0): Fraction(1)}, y1, _poly_mul(y1, y1), y2, _poly_mul(y2, y2), _poly_mul(y1, y2))
    labels = ("1", "y1", "y1^2", "y2", "y2^2", "y1y2")
    aliases = {"pt": [Fraction(x) for x in (0, 0, 1, 0, 1, -1)],
               "O": units[0],
               "P1^-1": _vec_add(units[0], units[1], -1),
               "P2^-1": _vec_add(units[0], units[3], -1)}
    t = Target("fl3", n, 2, labels, mult, (p1, p2), chi, monos,
               _fl3_provider(p1, p2), aliases, "fl3")
    return validate(t)


def preset(name: str) -> Target:
    name = name.strip().lower()
    if name.startswith("cpn:"):
        try:
            N = int(name[4:])
        except ValueError:
            raise ValidationFailure("bad preset %r" % name, invariant="preset")
        return cpn(N)
    if name in ("cp1", "cp2", "cp3", "cp4", "cp5"):
        return cpn(int(name[2:]))
    if name == "fl3":
        return fl3()
    raise ValidationFailure("unknown preset %r" % name, invariant="preset")


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


def load_target(document) -> Target:
    """Accept a preset id, a path to a JSON document, or a parsed document."""
    if isinstance(document, Target):
        return document
    if isinstance(document, str):
        if document.strip().lower().startswith("cpn:") or document.strip().lower() in (
                "fl3", "cp1", "cp2", "cp3", "cp4", "cp5"):
            return preset(document)
        path = Path(document)
        if not path.exists():
            raise ValidationFailure("no preset or file named %r" % document, invariant="document")
        document = json.loads(path.read_text())
    if not isinstance(document, dict):
        raise ValidationFailure("target document must be a JSON object", invariant="document")
    j = document.get("j", {})
    if "preset" in j and set(document) <= {"j", "name"}:
        return preset(j["preset"])
    try:
        n = int(document["rank"])
        r = int(document["picard_rank"])
        labels = tuple(document["basis_labels"])
        mult = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for a, b, g, c in document["mult_table"]:
            mult[a][b][g] = as_rational(c)
        mult = tuple(tuple(tuple(v) for v in row) for row in mult)
        picard = tuple(Mat.rational(P) for P in document["picard_matrices"])
        chi = tuple(as_rational(c) for c in document["chi"])
        monos = tuple(poly_from_terms(F) for F in document["basis_monomials"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ValidationFailure("malformed target document: %s" % exc, invariant="document")
    provider = None
    pre = None
    if "preset" in j:
        base = preset(j["preset"])
        provider, pre = base.j_provider, base.preset
    elif "table" in j:
        table = {}
        for entry in j["table"]:
            table[tuple(entry["d"])] = tuple(QRat.from_json(c) for c in entry["coeffs"])
        provider = _table_provider(table)
    aliases = {k: [as_rational(x) for x in v] for k, v in document.get("aliases", {}).items()}
    t = Target(str(document.get("name", "custom")), n, r, labels, mult, picard, chi, monos,
               provider, aliases, pre)
    return validate(t)


# ---------------------------------------------------------------------------
# basis change
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordinateMap:
    """Old coordinates t = C u for new coordinates u (Psi = Phi C)."""

    C: Mat
    C_inv: Mat

    def old_from_new(self):
        return [list(r) for r in self.C.rows]


def change_basis(t: Target, C):
    """New basis Psi_beta = sum_alpha C[alpha][beta] Phi_alpha."""
    C = C if isinstance(C, Mat) else Mat.rational(C)
    n = t.rank
    if (C.nrows, C.ncols) != (n, n):
        raise SingularBasisChange("basis change must be %dx%d" % (n, n), invariant="shape")
    try:
        Ci = C.inverse()
    except Exception:
        raise SingularBasisChange("basis change matrix is singular", invariant="invertible")
    if C.column(0) != t.unit(0):
        raise IdentityNotPreserved("first new basis vector must be Phi_0", invariant="identity")
    cols = [C.column(b) for b in range(n)]
    mult = []
    for a in range(n):
        row = []
        for b in range(n):
            prod_ = t.classical_mul(cols[a], cols[b])
            row.append(tuple(Ci.mul_vec(prod_)))
        mult.append(tuple(row))
    picard = tuple(Ci.matmul(P).matmul(C) for P in t.picard_matrices)
    chi = tuple(t.chi_of(cols[b]) for b in range(n))
    monos = []
    for b in range(n):
        acc = {}
        for a in range(n):
            if C[a, b]:
                for e, c in t.basis_monomials[a].items():
                    acc[e] = acc.get(e, Fraction(0)) + c * C[a, b]
        monos.append({e: c for e, c in acc.items() if c})
    if t.j_provider is not None:
        base = t.j_provider

        def provider(d, base=base):
            v = base(d)
            return [QRat.sum_of([v[j] * Ci[i, j] for j in range(n) if Ci[i, j]]) for i in range(n)]
    else:
        provider = None

    aliases = {k: Ci.mul_vec(v) for k, v in t.aliases.items()}
    labels = tuple("psi%d" % b if b else "1" for b in range(n))
    new = Target(t.name + "*", n, t.picard_rank, labels, tuple(mult), picard, chi,
                 tuple(monos), provider, aliases, None)
    return validate(new), CoordinateMap(C, Ci)
