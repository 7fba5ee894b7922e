"""Exponential polynomials sum_lambda e^{lambda.t} p_lambda(t) and an exact
solver for constant-coefficient linear ODE systems with such right-hand sides.

Coordinates are indexed 0..nvars-1; callers decide what each index means.
A term is keyed by ``(lam, mono)``: the exponent vector (ints, or Fractions
when not integral) and the monomial exponent vector of the polynomial part.
Coefficients are Fractions, or QRat / QLaurent for q-dependent data.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import flint

from .errors import AnsatzInsufficient, DimensionMismatch, ResidualNonzero
from .scalarq import QLaurent, QRat, as_rational, format_rational


def _norm_lam(x):
    x = as_rational(x)
    return x.numerator if x.denominator == 1 else x


def _ring_sum(values):
    if len(values) == 1:
        return values[0]
    if any(isinstance(v, QRat) for v in values):
        return QRat.sum_of(values)
    out = values[0]
    for v in values[1:]:
        out = out + v
    return out


def _addvec(a, b):
    return tuple(x + y for x, y in zip(a, b))


class ExpPoly:
    """Immutable exponential polynomial in ``nvars`` coordinates."""

    __slots__ = ("nvars", "_terms")

    def __init__(self, terms=None, nvars=1):
        self.nvars = nvars
        out = {}
        if terms:
            for (lam, mono), c in dict(terms).items():
                if len(lam) != nvars or len(mono) != nvars:
                    raise DimensionMismatch("term arity differs from nvars=%d" % nvars)
                if not isinstance(c, (QRat, QLaurent)):
                    c = as_rational(c)
                if c:
                    key = (tuple(_norm_lam(x) for x in lam), tuple(int(k) for k in mono))
                    out[key] = out[key] + c if key in out else c
            out = {k: v for k, v in out.items() if v}
        self._terms = out

    @classmethod
    def _raw(cls, terms, nvars):
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj._terms = terms
        return obj

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, nvars):
        return cls._raw({}, nvars)

    @classmethod
    def constant(cls, c, nvars):
        if not isinstance(c, (QRat, QLaurent)):
            c = as_rational(c)
        if not c:
            return cls.zero(nvars)
        z = (0,) * nvars
        return cls._raw({(z, z): c}, nvars)

    @classmethod
    def var(cls, i, nvars):
        z = [0] * nvars
        z[i] = 1
        return cls._raw({((0,) * nvars, tuple(z)): Fraction(1)}, nvars)

    @classmethod
    def exp(cls, lam, nvars=None):
        """e^{lam . t}."""
        lam = tuple(_norm_lam(x) for x in lam)
        n = len(lam) if nvars is None else nvars
        return cls._raw({(lam, (0,) * n): Fraction(1)}, n)

    @classmethod
    def coerce(cls, x, nvars):
        if isinstance(x, ExpPoly):
            return x
        return cls.constant(x, nvars)

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def lambdas(self):
        return sorted({lam for lam, _ in self._terms}, key=_lam_sort_key)

    def polynomial_part(self, lam):
        """Dict mono -> coefficient of e^{lam.t}."""
        lam = tuple(_norm_lam(x) for x in lam)
        return {m: c for (l, m), c in self._terms.items() if l == lam}

    def degree_in(self, i):
        return max((m[i] for _, m in self._terms), default=-1)

    def depends_on(self, i):
        return any(l[i] != 0 or m[i] != 0 for l, m in self._terms)

    def has_integral_exponents(self):
        return all(isinstance(x, int) for lam, _ in self._terms for x in lam)

    def is_constant(self):
        z = (0,) * self.nvars
        return all(k == (z, z) for k in self._terms)

    def constant_term(self):
        z = (0,) * self.nvars
        return self._terms.get((z, z), Fraction(0))

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ExpPoly):
            if isinstance(other, (QRat, QLaurent)) or _is_scalar(other):
                other = ExpPoly.constant(other, self.nvars)
            else:
                return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        return ExpPoly.sum_of((self, other))

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly._raw({k: -c for k, c in self._terms.items()}, self.nvars)

    def __sub__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.coerce(other, self.nvars)
        return self + (-other)

    def __rsub__(self, other):
        return ExpPoly.coerce(other, self.nvars) - self

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            return ExpPoly.sum_products(((self, other),), self.nvars)
        if isinstance(other, (QRat, QLaurent)) or _is_scalar(other):
            if not isinstance(other, (QRat, QLaurent)):
                other = as_rational(other)
            if not other:
                return ExpPoly.zero(self.nvars)
            out = {}
            for k, c in self._terms.items():
                v = c * other
                if v:
                    out[k] = v
            return ExpPoly._raw(out, self.nvars)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ExpPoly):
            if any(k != ((0,) * self.nvars,) * 2 for k in other._terms):
                return NotImplemented
            other = other.constant_term()
        if not _is_scalar(other):
            return NotImplemented
        return self * (1 / as_rational(other))

    def __pow__(self, n):
        out = ExpPoly.constant(1, self.nvars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    @classmethod
    def sum_of(cls, polys, nvars=None):
        polys = [p for p in polys if p]
        if not polys:
            return cls.zero(nvars if nvars is not None else 1)
        if len(polys) == 1:
            return polys[0]
        n = polys[0].nvars
        acc = defaultdict(list)
        for p in polys:
            for k, c in p._terms.items():
                acc[k].append(c)
        return cls._collect(acc, n)

    @classmethod
    def sum_products(cls, pairs, nvars):
        """sum a*b over pairs, accumulated in one pass."""
        acc = defaultdict(list)
        for a, b in pairs:
            if not a or not b:
                continue
            for (la, ma), ca in a._terms.items():
                for (lb, mb), cb in b._terms.items():
                    acc[(_addvec(la, lb), _addvec(ma, mb))].append(ca * cb)
        return cls._collect(acc, nvars)

    @classmethod
    def _collect(cls, acc, nvars):
        out = {}
        for k, vals in acc.items():
            v = _ring_sum(vals)
            if v:
                out[k] = v
        return cls._raw(out, nvars)

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            if isinstance(other, (QRat, QLaurent)) or _is_scalar(other):
                other = ExpPoly.constant(other, self.nvars)
            else:
                return NotImplemented
        if self._terms.keys() != other._terms.keys():
            return (self - other).is_zero()
        return all(c == other._terms[k] for k, c in self._terms.items())

    __hash__ = None

    # -- calculus -----------------------------------------------------------
    def differentiate(self, i):
        """d/dt^i via e^{lam.t} p -> e^{lam.t} (lam_i p + dp/dt^i)."""
        acc = defaultdict(list)
        for (lam, mono), c in self._terms.items():
            if lam[i]:
                acc[(lam, mono)].append(c * lam[i])
            if mono[i]:
                m = list(mono)
                m[i] -= 1
                acc[(lam, tuple(m))].append(c * mono[i])
        return ExpPoly._collect(acc, self.nvars)

    def eval_zero(self, i):
        """Set t^i = 0."""
        acc = defaultdict(list)
        for (lam, mono), c in self._terms.items():
            if mono[i]:
                continue
            if lam[i]:
                lam = lam[:i] + (0,) + lam[i + 1:]
            acc[(lam, mono)].append(c)
        return ExpPoly._collect(acc, self.nvars)

    def eval_all_zero(self):
        vals = [c for (l, m), c in self._terms.items() if not any(m)]
        if not vals:
            return Fraction(0)
        return _ring_sum(vals)

    def taylor_derivative(self, orders):
        """(prod_i d^{orders[i]}/dt_i^{orders[i]}) of self at t = 0.

        For one term e^{lam.t} t^b the derivative of order a at 0 is
        prod_i binom(a_i, b_i) b_i! lam_i^{a_i - b_i}.
        """
        total = []
        for (lam, mono), c in self._terms.items():
            f = 1
            for a, b, l in zip(orders, mono, lam):
                if b > a:
                    f = 0
                    break
                if a > b and l == 0:
                    f = 0
                    break
                f = f * math.comb(a, b) * math.factorial(b) * (l ** (a - b) if a > b else 1)
            if f:
                total.append(c * f)
        if not total:
            return Fraction(0)
        return _ring_sum(total)

    def map_coefficients(self, fn):
        out = {}
        for k, c in self._terms.items():
            v = fn(c)
            if v:
                out[k] = v
        return ExpPoly._raw(out, self.nvars)

    def bar(self):
        return self.map_coefficients(lambda c: c.bar() if isinstance(c, (QRat, QLaurent)) else c)

    def extend(self, nvars, positions):
        """Embed into ``nvars`` coordinates; old coordinate j goes to positions[j]."""
        out = {}
        for (lam, mono), c in self._terms.items():
            l2, m2 = [0] * nvars, [0] * nvars
            for j, p in enumerate(positions):
                l2[p], m2[p] = lam[j], mono[j]
            out[(tuple(l2), tuple(m2))] = c
        return ExpPoly._raw(out, nvars)

    def substitute_linear(self, C):
        """Rewrite in new coordinates u with t_i = sum_j C[i][j] u_j."""
        C = [[as_rational(x) for x in row] for row in C]
        n_old = self.nvars
        n_new = len(C[0]) if C else 0
        if len(C) != n_old:
            raise DimensionMismatch("substitution matrix has %d rows, need %d" % (len(C), n_old))
        linear = []
        for i in range(n_old):
            terms = {}
            for j in range(n_new):
                if C[i][j]:
                    e = [0] * n_new
                    e[j] = 1
                    terms[tuple(e)] = C[i][j]
            linear.append(terms)
        powers = {}

        def power(i, k):
            key = (i, k)
            if key not in powers:
                if k == 0:
                    powers[key] = {(0,) * n_new: Fraction(1)}
                else:
                    powers[key] = _poly_mul(power(i, k - 1), linear[i])
            return powers[key]

        acc = defaultdict(list)
        for (lam, mono), c in self._terms.items():
            new_lam = tuple(_norm_lam(sum((lam[i] * C[i][j] for i in range(n_old)), Fraction(0)))
                            for j in range(n_new))
            poly = {(0,) * n_new: Fraction(1)}
            for i, k in enumerate(mono):
                if k:
                    poly = _poly_mul(poly, power(i, k))
            for m, v in poly.items():
                acc[(new_lam, m)].append(c * v)
        return ExpPoly._collect(acc, n_new)

    # -- presentation -------------------------------------------------------
    def to_json(self):
        groups = defaultdict(list)
        for (lam, mono), c in self._terms.items():
            groups[lam].append((mono, c))
        out = []
        for lam in sorted(groups, key=_lam_sort_key):
            poly = []
            for mono, c in sorted(groups[lam]):
                poly.append([list(mono), c.to_json() if isinstance(c, QRat) else
                             format_rational(c) if not isinstance(c, QLaurent) else
                             QRat.coerce(c).to_json()])
            out.append({"lambda": [format_rational(x) for x in lam], "poly": poly})
        return out

    @classmethod
    def from_json(cls, doc, nvars):
        terms = {}
        for group in doc:
            lam = tuple(as_rational(x) for x in group["lambda"])
            for mono, c in group["poly"]:
                c = QRat.from_json(c) if isinstance(c, dict) else as_rational(c)
                terms[(lam, tuple(mono))] = c
        return cls(terms, nvars)

    def pretty(self, names=None):
        names = names or default_names(self.nvars)
        if not self._terms:
            return "0"
        groups = defaultdict(dict)
        for (lam, mono), c in self._terms.items():
            groups[lam][mono] = c
        chunks = []
        for lam in sorted(groups, key=_lam_sort_key):
            body = _format_poly(groups[lam], names)
            if not any(lam):
                chunks.append(body)
                continue
            ex = _format_linear(lam, names)
            if body == "1":
                chunks.append("e^{%s}" % ex)
            else:
                chunks.append("e^{%s}(%s)" % (ex, body))
        return " + ".join(chunks)

    def __str__(self):
        return self.pretty()

    def __repr__(self):
        return "ExpPoly(%s)" % self.pretty()


def _is_scalar(x):
    return isinstance(x, (int, Fraction)) or type(x).__name__ in ("fmpq", "fmpz")


def _lam_sort_key(lam):
    return tuple(as_rational(x) for x in lam)


def _poly_mul(a, b):
    out = defaultdict(Fraction)
    for ma, ca in a.items():
        for mb, cb in b.items():
            out[_addvec(ma, mb)] += ca * cb
    return {k: v for k, v in out.items() if v}


def default_names(n):
    if n == 1:
        return ["t"]
    return ["t%d" % i for i in range(n)]


def _format_linear(lam, names):
    parts = []
    for x, nm in zip(lam, names):
        if not x:
            continue
        x = as_rational(x)
        if x == 1:
            s = nm
        elif x == -1:
            s = "-" + nm
        else:
            s = "%s%s" % (format_rational(x), nm)
        parts.append(s)
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else "+" + p
    return out


def _format_coeff(c):
    if isinstance(c, (QRat, QLaurent)):
        return "[%s]" % c
    return format_rational(c)


def _format_poly(poly, names):
    items = sorted(poly.items(), key=lambda kv: (sum(kv[0]), tuple(-x for x in kv[0])))
    out = []
    for mono, c in items:
        mon = "*".join((nm if k == 1 else "%s^%d" % (nm, k)) for nm, k in zip(names, mono) if k)
        if isinstance(c, (QRat, QLaurent)):
            term = _format_coeff(c) + ("*" + mon if mon else "")
            out.append(("+", term))
            continue
        mag, sign = abs(c), "-" if c < 0 else "+"
        if not mon:
            term = format_rational(mag)
        elif mag == 1:
            term = mon
        else:
            term = "%s*%s" % (format_rational(mag), mon)
        out.append((sign, term))
    s = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, term in out[1:]:
        s += " %s %s" % (sign, term)
    return s


# ---------------------------------------------------------------------------
# linear ODE systems  Y' = L Y + B(t)
# ---------------------------------------------------------------------------


@dataclass
class OdeProblem:
    dimension: int
    L: list
    B: list
    Y0: list
    variable_index: int


def _fq(x):
    return flint.fmpq(x.numerator, x.denominator) if isinstance(x, Fraction) else flint.fmpq(x)


def _from_fq(x):
    return Fraction(int(x.p), int(x.q))


class _Spectrum:
    """Projectors onto generalised eigenspaces of a constant rational matrix."""

    def __init__(self, key, n):
        self.n = n
        self.L = flint.fmpq_mat(n, n, [_fq(x) for x in key])
        cp = self.L.charpoly()
        self.projectors = {}
        self.nilpotents = {}
        self.mult = {}
        one = flint.fmpq_mat(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])
        self.identity = one
        total = flint.fmpq_mat(n, n)
        for r, m in cp.roots():
            m = int(m)
            f = flint.fmpq_poly([-r, 1]) ** m
            g = cp / f
            _, s, t = f.xgcd(g)
            e = (t * g) % cp
            P = _poly_at_matrix(e, self.L, one)
            mu = _from_fq(r)
            self.projectors[mu] = P
            self.nilpotents[mu] = (self.L - one * r) * P
            self.mult[mu] = m
            total = total + P
        self.irrational = one - total
        self.has_irrational = any(x != 0 for x in self.irrational.entries())
        self._resolvents = {}

    def resolvent(self, nu):
        """(nu - L)^{-1} on the complement of the nu-eigenspace, zero on it."""
        if nu not in self._resolvents:
            one = self.identity
            r = _fq(nu)
            if nu in self.projectors:
                P = self.projectors[nu]
                M = ((one * r - self.L + P).inv()) * (one - P)
            else:
                M = (one * r - self.L).inv()
            self._resolvents[nu] = M
        return self._resolvents[nu]


def _poly_at_matrix(p, M, one):
    out = flint.fmpq_mat(M.nrows(), M.ncols())
    for c in reversed(p.coeffs()):
        out = out * M + one * c
    return out


@lru_cache(maxsize=256)
def _spectrum(key, n):
    return _Spectrum(key, n)


def spectrum_of(L):
    n = len(L)
    return _spectrum(tuple(as_rational(x) for row in L for x in row), n)


class _VecDict:
    """Map key -> length-n list of fmpq, with batched matrix application."""

    def __init__(self, n, data=None):
        self.n = n
        self.data = data if data is not None else {}

    @classmethod
    def from_exppolys(cls, polys):
        n = len(polys)
        data = {}
        for i, p in enumerate(polys):
            for k, c in p.items():
                if isinstance(c, (QRat, QLaurent)):
                    raise DimensionMismatch("ODE data must have rational coefficients")
                vec = data.get(k)
                if vec is None:
                    vec = data[k] = [flint.fmpq(0)] * n
                vec[i] = vec[i] + _fq(c)
        return cls(n, data)

    def to_exppolys(self, nvars):
        out = [dict() for _ in range(self.n)]
        for k, vec in self.data.items():
            for i, x in enumerate(vec):
                if x != 0:
                    out[i][k] = _from_fq(x)
        return [ExpPoly._raw(t, nvars) for t in out]

    def apply(self, M):
        if not self.data:
            return _VecDict(self.n)
        keys = list(self.data)
        K, n = len(keys), self.n
        flat = [self.data[k][i] for i in range(n) for k in keys]
        R = (M * flint.fmpq_mat(n, K, flat)).entries()
        return _VecDict(n, {k: [R[i * K + j] for i in range(n)] for j, k in enumerate(keys)})

    def add(self, other, scale=1):
        data = {k: list(v) for k, v in self.data.items()}
        s = flint.fmpq(scale) if not isinstance(scale, flint.fmpq) else scale
        for k, v in other.data.items():
            if k in data:
                cur = data[k]
                for i, x in enumerate(v):
                    if x != 0:
                        cur[i] = cur[i] + s * x
            else:
                data[k] = [s * x for x in v]
        return _VecDict(self.n, data)

    def scaled(self, s):
        s = flint.fmpq(s) if not isinstance(s, flint.fmpq) else s
        return _VecDict(self.n, {k: [s * x for x in v] for k, v in self.data.items()})

    def pruned(self):
        return _VecDict(self.n, {k: v for k, v in self.data.items() if any(x != 0 for x in v)})

    def is_zero(self):
        return all(x == 0 for v in self.data.values() for x in v)


def _with_active(rest_key, a, nu, k):
    lam, mono = rest_key
    return (lam[:a] + (nu,) + lam[a + 1:], mono[:a] + (k,) + mono[a + 1:])


def _split_active(vd, a):
    """{nu: {k: _VecDict over rest keys}} for the active coordinate a."""
    out = defaultdict(lambda: defaultdict(dict))
    for (lam, mono), vec in vd.data.items():
        nu, k = lam[a], mono[a]
        rest = (lam[:a] + (0,) + lam[a + 1:], mono[:a] + (0,) + mono[a + 1:])
        out[nu][k][rest] = vec
    return {nu: {k: _VecDict(vd.n, d) for k, d in ks.items()} for nu, ks in out.items()}


def _integrate(poly):
    """poly: {k: _VecDict}; returns the t-antiderivative vanishing at 0."""
    return {k + 1: v.scaled(flint.fmpq(1, k + 1)) for k, v in poly.items()}


def _poly_apply(poly, M):
    out = {}
    for k, v in poly.items():
        w = v.apply(M).pruned()
        if w.data:
            out[k] = w
    return out


def _poly_add(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k].add(v) if k in out else v
    return out


def solve_linear_ode(problem: OdeProblem, verify=True):
    """Exact solution of Y' = L Y + B with Y(active = 0) = Y0.

    The particular solution is built exponent by exponent: off the
    resonant eigenspace the polynomial part follows from the resolvent,
    on it from repeated integration against the nilpotent part. The
    homogeneous part is exp(L t) c written with the spectral projectors.
    """
    n, a = problem.dimension, problem.variable_index
    L, B, Y0 = problem.L, list(problem.B), list(problem.Y0)
    if len(L) != n or any(len(row) != n for row in L) or len(B) != n or len(Y0) != n:
        raise DimensionMismatch("ODE data does not match dimension %d" % n)
    nvars = _common_nvars(B + Y0)
    B = [ExpPoly.coerce(b, nvars) for b in B]
    Y0 = [ExpPoly.coerce(y, nvars) for y in Y0]
    if not 0 <= a < nvars:
        raise DimensionMismatch("active variable %d out of range" % a)
    if any(y.depends_on(a) for y in Y0):
        raise DimensionMismatch("initial value depends on the active variable")
    spec = spectrum_of(L)

    particular = defaultdict(dict)          # nu -> {k: _VecDict}
    for nu, poly in _split_active(_VecDict.from_exppolys(B), a).items():
        nu_f = as_rational(nu)
        M = spec.resolvent(nu_f)
        top = max(poly)
        y, nxt = {}, None
        for k in range(top, -1, -1):
            rhs = poly.get(k, _VecDict(n))
            if nxt is not None:
                rhs = rhs.add(nxt, -(k + 1))
            cur = rhs.apply(M).pruned()
            if cur.data:
                y[k] = cur
            nxt = cur
        if nu_f in spec.projectors:
            P, N = spec.projectors[nu_f], spec.nilpotents[nu_f]
            acc = _integrate(_poly_apply(poly, P))
            z = dict(acc)
            while acc:
                acc = _integrate(_poly_apply(acc, N))
                z = _poly_add(z, acc)
            y = _poly_add(y, z)
        particular[nu] = y

    c = _VecDict.from_exppolys(Y0)
    for nu, y in particular.items():
        if 0 in y:
            c = c.add(y[0], -1)
    c = c.pruned()
    if c.data and spec.has_irrational:
        if not c.apply(spec.irrational).pruned().is_zero():
            raise AnsatzInsufficient(
                "initial data excites eigenvalues outside Q (active variable %d)" % a)
    solution = _VecDict(n)
    for mu, P in spec.projectors.items():
        comp = c.apply(P).pruned()
        k, fact = 0, 1
        while comp.data:
            lifted = {_with_active(r, a, _norm_lam(mu), k): [x / fact for x in v]
                      for r, v in comp.data.items()}
            solution = solution.add(_VecDict(n, lifted))
            k += 1
            fact *= k
            comp = comp.apply(spec.nilpotents[mu]).pruned()
    for nu, y in particular.items():
        for k, v in y.items():
            lifted = {_with_active(r, a, nu, k): vec for r, vec in v.data.items()}
            solution = solution.add(_VecDict(n, lifted))
    Y = solution.pruned().to_exppolys(nvars)
    if verify:
        check_ode_solution(problem, Y)
    return Y


def _common_nvars(polys):
    ns = {p.nvars for p in polys if isinstance(p, ExpPoly)}
    if len(ns) != 1:
        raise DimensionMismatch("ODE entries have inconsistent coordinate counts %s" % sorted(ns))
    return ns.pop()


def check_ode_solution(problem, Y):
    """Raise ResidualNonzero unless Y' - L Y - B = 0 and Y(0) = Y0 exactly."""
    n, a = problem.dimension, problem.variable_index
    nvars = Y[0].nvars
    Lm = flint.fmpq_mat(n, n, [_fq(as_rational(x)) for row in problem.L for x in row])
    dY = _VecDict.from_exppolys([y.differentiate(a) for y in Y])
    LY = _VecDict.from_exppolys(Y).apply(Lm)
    B = _VecDict.from_exppolys([ExpPoly.coerce(b, nvars) for b in problem.B])
    res = dY.add(LY, -1).add(B, -1)
    if not res.is_zero():
        raise ResidualNonzero("ODE residual does not vanish (variable %d)" % a)
    for y, y0 in zip(Y, problem.Y0):
        if y.eval_zero(a) != ExpPoly.coerce(y0, nvars):
            raise ResidualNonzero("initial condition not met (variable %d)" % a)
