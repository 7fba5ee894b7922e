"""Exact scalars in the formal variable q.

Three value types live here:

* ``QLaurent``  -- Laurent polynomials in q over Q,
* ``QRat``      -- rational functions N(q) / prod (1 - q^m)^e whose poles sit at
  roots of unity (and at q = 0 through negative powers in N),
* ``OneMinusQExpansion`` -- a polynomial rewritten in powers of (1 - q).

Numerators are stored as an integer polynomial (python-flint ``fmpz_poly``)
times ``q^low / den`` with ``den`` a positive integer coprime to the content.
All objects are immutable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import flint

from .errors import EvalAtPole, InversionOfZero, NotInvertible, NotPolynomialInQ

Rational = Fraction
_ZP = flint.fmpz_poly
_POLY_ZERO = _ZP([])


def as_rational(x) -> Fraction:
    """Coerce int / Fraction / "p/q" strings / flint numbers to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    raise TypeError("cannot interpret %r as a rational" % (x,))


def format_rational(x) -> str:
    x = as_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


@lru_cache(maxsize=None)
def _one_minus(m: int):
    return _ZP([1] + [0] * (m - 1) + [-1])


@lru_cache(maxsize=None)
def _cofactor(m: int, p: int):
    """(1 - q^m) / (1 - q^(m/p)) = sum_{j<p} q^{j m / p}."""
    s = m // p
    coeffs = [0] * (m - s + 1)
    for j in range(p):
        coeffs[j * s] = 1
    return _ZP(coeffs)


@lru_cache(maxsize=None)
def _prime_factors(m: int):
    out, k, n = [], 2, m
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return tuple(out)


@lru_cache(maxsize=8192)
def den_poly(factors: tuple):
    """Expanded prod (1 - q^m)^e for a sorted factor tuple ((m, e), ...)."""
    out = _ZP([1])
    for m, e in factors:
        out *= _one_minus(m) ** e
    return out


def _valuation(poly) -> int:
    if poly[0] != 0:
        return 0
    for i, c in enumerate(poly.coeffs()):
        if c != 0:
            return i
    return 0


# --------------------------------------------------------------------------
# Laurent polynomials
# --------------------------------------------------------------------------


class QLaurent:
    """Laurent polynomial ``q^low * num(q) / den``; ``num(0) != 0`` unless zero."""

    __slots__ = ("_low", "_num", "_den", "_hash")

    def __init__(self, coefficients=None):
        low, num, den = 0, _POLY_ZERO, 1
        if coefficients:
            items = [(int(k), as_rational(v)) for k, v in dict(coefficients).items()]
            items = [(k, v) for k, v in items if v]
            if items:
                low = min(k for k, _ in items)
                top = max(k for k, _ in items)
                den = math.lcm(*(v.denominator for _, v in items))
                coeffs = [0] * (top - low + 1)
                for k, v in items:
                    coeffs[k - low] += v.numerator * (den // v.denominator)
                num = _ZP(coeffs)
        self._set(low, num, den)

    def _set(self, low, num, den):
        self._hash = None
        if num.is_zero():
            self._low, self._num, self._den = 0, _POLY_ZERO, 1
            return
        v = _valuation(num)
        if v:
            num = num.right_shift(v)
            low += v
        if den != 1:
            g = math.gcd(int(num.content()), den)
            if g != 1:
                num = num / g
                den //= g
        self._low, self._num, self._den = low, num, den

    @classmethod
    def _raw(cls, low, num, den=1):
        obj = cls.__new__(cls)
        obj._set(low, num, den)
        return obj

    @classmethod
    def constant(cls, c):
        c = as_rational(c)
        return cls._raw(0, _ZP([c.numerator]), c.denominator)

    @classmethod
    def monomial(cls, k, c=1):
        c = as_rational(c)
        return cls._raw(k, _ZP([c.numerator]), c.denominator)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, QLaurent):
            return x
        return cls.constant(x)

    # -- inspection --------------------------------------------------------
    @property
    def coefficients(self):
        d = self._den
        return {self._low + i: Fraction(int(c), d)
                for i, c in enumerate(self._num.coeffs()) if c != 0}

    def coefficient(self, k):
        i = k - self._low
        if i < 0 or i > self._num.degree():
            return Fraction(0)
        return Fraction(int(self._num[i]), self._den)

    @property
    def valuation(self):
        return None if self.is_zero() else self._low

    @property
    def degree(self):
        return None if self.is_zero() else self._low + self._num.degree()

    def is_zero(self):
        return self._num.is_zero()

    def __bool__(self):
        return not self._num.is_zero()

    def is_constant(self):
        return self.is_zero() or (self._low == 0 and self._num.degree() == 0)

    def constant_value(self):
        """The rational value of a constant Laurent polynomial."""
        if self.is_zero():
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("not a constant: %s" % self)
        return Fraction(int(self._num[0]), self._den)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, QRat):
            return NotImplemented
        other = QLaurent.coerce(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        low = min(self._low, other._low)
        a = self._num.left_shift(self._low - low) if self._low > low else self._num
        b = other._num.left_shift(other._low - low) if other._low > low else other._num
        if self._den == other._den:
            return QLaurent._raw(low, a + b, self._den)
        den = math.lcm(self._den, other._den)
        return QLaurent._raw(low, a * (den // self._den) + b * (den // other._den), den)

    __radd__ = __add__

    def __neg__(self):
        return QLaurent._raw(self._low, -self._num, self._den)

    def __sub__(self, other):
        if isinstance(other, QRat):
            return NotImplemented
        return self + (-QLaurent.coerce(other))

    def __rsub__(self, other):
        return QLaurent.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, QRat):
            return NotImplemented
        if isinstance(other, QLaurent):
            return QLaurent._raw(self._low + other._low, self._num * other._num,
                                 self._den * other._den)
        c = as_rational(other)
        return QLaurent._raw(self._low, self._num * c.numerator, self._den * c.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (QLaurent, QRat)):
            return QRat.coerce(self) * QRat.coerce(other).inv()
        c = as_rational(other)
        if not c:
            raise InversionOfZero("division of a Laurent polynomial by zero")
        return self * (1 / c)

    def __rtruediv__(self, other):
        return QRat.coerce(other) * QRat.coerce(self).inv()

    def __pow__(self, n):
        if n < 0:
            return QRat.coerce(self).inv() ** (-n)
        return QLaurent._raw(self._low * n, self._num ** n, self._den ** n)

    def shift(self, k):
        """Multiply by q^k."""
        if self.is_zero():
            return self
        return QLaurent._raw(self._low + k, self._num, self._den)

    def bar(self):
        """Substitute q -> 1/q."""
        if self.is_zero():
            return self
        deg = self._num.degree()
        return QLaurent._raw(-(self._low + deg), _ZP(self._num.coeffs()[::-1]), self._den)

    def __eq__(self, other):
        if isinstance(other, QRat):
            return other == self
        try:
            other = QLaurent.coerce(other)
        except TypeError:
            return NotImplemented
        return (self._low == other._low and self._den == other._den
                and self._num == other._num)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._low, tuple(int(c) for c in self._num.coeffs()), self._den))
        return self._hash

    def eval(self, value):
        value = as_rational(value)
        if self.is_zero():
            return Fraction(0)
        if value == 0:
            if self._low < 0:
                raise EvalAtPole("q = 0 substituted into q^%d" % self._low)
            return Fraction(int(self._num[0]), self._den) if self._low == 0 else Fraction(0)
        x = flint.fmpq(value.numerator, value.denominator)
        v = as_rational(self._num(x)) / self._den
        return v * value ** self._low

    def __repr__(self):
        return "QLaurent(%s)" % self

    def __str__(self):
        return format_laurent(self.coefficients)


def format_laurent(coeffs, var="q"):
    if not coeffs:
        return "0"
    parts = []
    for k in sorted(coeffs):
        c = coeffs[k]
        if k == 0:
            mono = ""
        elif k == 1:
            mono = var
        else:
            mono = "%s^%d" % (var, k) if k > 0 else "%s^(%d)" % (var, k)
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = "%s*%s" % (format_rational(mag), mono)
        else:
            body = format_rational(mag)
        parts.append(("-" if c < 0 else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += " %s %s" % (sign, body)
    return out


# --------------------------------------------------------------------------
# rational functions with root-of-unity poles
# --------------------------------------------------------------------------


def _norm_factors(den):
    if isinstance(den, dict):
        items = den.items()
    else:
        acc = {}
        for m, e in den:
            acc[m] = acc.get(m, 0) + e
        items = acc.items()
    for m, e in items:
        if m <= 0 or e < 0:
            raise ValueError("bad denominator factor (1-q^%s)^%s" % (m, e))
    return tuple(sorted((m, e) for m, e in items if e))


def _cancel(low, num, cden, factors):
    """Cancel (1 - q^m) factors against the integer numerator polynomial.

    Works in two passes that repeat until stable: exact division by whole
    factors, then lowering a factor (1 - q^m) to (1 - q^(m/p)) when the
    numerator absorbs the cyclotomic-type cofactor.
    """
    if not factors or num.is_zero():
        return low, num, cden, () if num.is_zero() else factors
    den = dict(factors)
    changed = True
    while changed:
        changed = False
        if num(1) == 0:
            for m in sorted(den):
                f = _one_minus(m)
                while den[m]:
                    qq, r = divmod(num, f)
                    if not r.is_zero():
                        break
                    num = qq
                    den[m] -= 1
                if num(1) != 0:
                    break
        for m in sorted(den, reverse=True):
            if m == 1 or not den[m]:
                continue
            for p in _prime_factors(m):
                qq, r = divmod(num, _cofactor(m, p))
                if r.is_zero():
                    num = qq
                    den[m] -= 1
                    den[m // p] = den.get(m // p, 0) + 1
                    changed = True
                    break
            if changed:
                break
    return low, num, cden, tuple(sorted((m, e) for m, e in den.items() if e))


class QRat:
    """``num / prod (1 - q^m)^e`` with ``num`` a ``QLaurent``."""

    __slots__ = ("_num", "_den")

    def __init__(self, num=0, den=()):
        num = QLaurent.coerce(num)
        factors = _norm_factors(den)
        low, p, c, factors = _cancel(num._low, num._num, num._den, factors)
        self._num = QLaurent._raw(low, p, c)
        self._den = factors

    @classmethod
    def _from_parts(cls, low, poly, cden, factors, cancel=True):
        if cancel:
            low, poly, cden, factors = _cancel(low, poly, cden, factors)
        obj = cls.__new__(cls)
        obj._num = QLaurent._raw(low, poly, cden)
        obj._den = factors if not obj._num.is_zero() else ()
        return obj

    @classmethod
    def coerce(cls, x):
        if isinstance(x, QRat):
            return x
        obj = cls.__new__(cls)
        obj._num = QLaurent.coerce(x)
        obj._den = ()
        return obj

    @classmethod
    def one_over(cls, m, e=1):
        """1 / (1 - q^m)^e."""
        return cls(1, ((m, e),))

    # -- inspection --------------------------------------------------------
    @property
    def numerator(self) -> QLaurent:
        return self._num

    @property
    def denominator_factors(self):
        return self._den

    def is_zero(self):
        return self._num.is_zero()

    def __bool__(self):
        return not self._num.is_zero()

    def den_degree(self):
        return sum(m * e for m, e in self._den)

    def as_laurent(self):
        """The equal Laurent polynomial, or None if there is a genuine pole."""
        if not self._den:
            return self._num
        qq, r = divmod(self._num._num, den_poly(self._den))
        if not r.is_zero():
            return None
        return QLaurent._raw(self._num._low, qq, self._num._den)

    def is_laurent(self):
        return self.as_laurent() is not None

    def is_constant(self):
        lp = self.as_laurent()
        return lp is not None and lp.is_constant()

    def constant_value(self):
        lp = self.as_laurent()
        if lp is None or not lp.is_constant():
            raise ValueError("not q-free: %s" % self)
        return lp.constant_value()

    def is_proper(self):
        """Vanishes at q = infinity and is regular at q = 0."""
        if self.is_zero():
            return True
        return self._num._low >= 0 and self._num.degree < self.den_degree()

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = QRat.coerce(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        return QRat.sum_of((self, other))

    __radd__ = __add__

    def __neg__(self):
        obj = QRat.__new__(QRat)
        obj._num = -self._num
        obj._den = self._den
        return obj

    def __sub__(self, other):
        return self + (-QRat.coerce(other))

    def __rsub__(self, other):
        return QRat.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (QRat, QLaurent)):
            try:
                c = as_rational(other)
            except TypeError:
                return NotImplemented
            if not c:
                return QRat.coerce(0)
            obj = QRat.__new__(QRat)
            obj._num = self._num * c
            obj._den = self._den
            return obj
        other = QRat.coerce(other)
        if self.is_zero() or other.is_zero():
            return QRat.coerce(0)
        a, b = self._num, other._num
        if not other._den:
            factors = self._den
        elif not self._den:
            factors = other._den
        else:
            acc = dict(self._den)
            for m, e in other._den:
                acc[m] = acc.get(m, 0) + e
            factors = tuple(sorted(acc.items()))
        return QRat._from_parts(a._low + b._low, a._num * b._num, a._den * b._den, factors)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (QRat, QLaurent)):
            return self * QRat.coerce(other).inv()
        c = as_rational(other)
        if not c:
            raise InversionOfZero("division of a q-rational function by zero")
        return self * (1 / c)

    def __rtruediv__(self, other):
        return QRat.coerce(other) * self.inv()

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        out = QRat.coerce(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, k):
        """Multiply by q^k."""
        obj = QRat.__new__(QRat)
        obj._num = self._num.shift(k)
        obj._den = self._den
        return obj

    def bar(self):
        """Substitute q -> 1/q, using 1 - q^-m = -q^-m (1 - q^m)."""
        if self.is_zero():
            return self
        num = self._num.bar()
        e_tot = sum(e for _, e in self._den)
        num = num.shift(sum(m * e for m, e in self._den))
        if e_tot % 2:
            num = -num
        obj = QRat.__new__(QRat)
        obj._num = num
        obj._den = self._den
        return obj

    def inv(self):
        """Multiplicative inverse; the numerator must be a product of cyclotomic factors."""
        if self.is_zero():
            raise InversionOfZero("inverse of zero")
        num = self._num
        poly = num._num
        content, facs = poly.factor()
        target = {}
        for f, e in facs:
            order = f.is_cyclotomic()
            if not order:
                raise NotInvertible("numerator factor %s is not cyclotomic" % f)
            target[order] = target.get(order, 0) + e
        new_den = _norm_factors(target)
        cof = den_poly(new_den)
        for f, e in facs:
            cof = cof / (f ** e)
        # 1/num = den * cof / (content * prod (1 - q^k)^a * q^low / cden)
        c = Fraction(num._den, int(content))
        top = QLaurent._raw(-num._low, cof * den_poly(self._den), 1) * c
        return QRat(top, new_den)

    @classmethod
    def sum_of(cls, items):
        """Sum with one common denominator and a single cancellation pass."""
        terms = []
        for x in items:
            x = cls.coerce(x)
            if not x.is_zero():
                terms.append(x)
        if not terms:
            return cls.coerce(0)
        if len(terms) == 1:
            t = terms[0]
            return cls._from_parts(t._num._low, t._num._num, t._num._den, t._den)
        lcm = {}
        for x in terms:
            for m, e in x._den:
                if lcm.get(m, 0) < e:
                    lcm[m] = e
        factors = tuple(sorted(lcm.items()))
        cden = math.lcm(*(x._num._den for x in terms))
        low = min(x._num._low for x in terms)
        acc = _POLY_ZERO
        for x in terms:
            p = x._num._num
            if x._den != factors:
                own = dict(x._den)
                cof = tuple((m, e - own.get(m, 0)) for m, e in factors if e > own.get(m, 0))
                p = p * den_poly(cof)
            scale = cden // x._num._den
            if scale != 1:
                p = p * scale
            if x._num._low > low:
                p = p.left_shift(x._num._low - low)
            acc += p
        return cls._from_parts(low, acc, cden, factors)

    @classmethod
    def dot(cls, pairs):
        """sum a*b with products left uncancelled until the final sum."""
        prods = []
        for a, b in pairs:
            a, b = cls.coerce(a), cls.coerce(b)
            if a.is_zero() or b.is_zero():
                continue
            acc = dict(a._den)
            for m, e in b._den:
                acc[m] = acc.get(m, 0) + e
            na, nb = a._num, b._num
            prods.append(cls._from_parts(na._low + nb._low, na._num * nb._num,
                                         na._den * nb._den, tuple(sorted(acc.items())),
                                         cancel=False))
        return cls.sum_of(prods)

    def __eq__(self, other):
        try:
            other = QRat.coerce(other)
        except TypeError:
            return NotImplemented
        if self._den == other._den:
            return self._num == other._num
        return (self - other).is_zero()

    __hash__ = None

    def eval(self, value):
        """Exact value at a rational point; removable singularities are resolved."""
        value = as_rational(value)
        if not self._den:
            return self._num.eval(value)
        num, den = self._num._num, den_poly(self._den)
        x = flint.fmpq(value.numerator, value.denominator)
        if den(x) == 0:
            g = num.gcd(den)
            num, den = num / g, den / g
            if den(x) == 0:
                raise EvalAtPole("pole of %s at q = %s" % (self, value))
        lp = QLaurent._raw(self._num._low, num, self._num._den)
        return lp.eval(value) / as_rational(den(x))

    def __repr__(self):
        return "QRat(%s)" % self

    def __str__(self):
        if not self._den:
            return str(self._num)
        den = "*".join(("(1-q^%d)" % m if m > 1 else "(1-q)") + ("^%d" % e if e > 1 else "")
                       for m, e in self._den)
        return "(%s)/(%s)" % (self._num, den)

    def to_json(self):
        c = self._num.coefficients
        return {"num": [[k, format_rational(c[k])] for k in sorted(c)],
                "den": [[m, e] for m, e in self._den]}

    @classmethod
    def from_json(cls, doc):
        return cls(QLaurent({int(k): as_rational(v) for k, v in doc["num"]}),
                   [(int(m), int(e)) for m, e in doc["den"]])


def qrat_arith(a, b, op):
    """Dispatch ``add`` / ``mul`` / ``inv`` / ``bar`` (the last two ignore ``b``)."""
    a = QRat.coerce(a)
    if op == "add":
        return a + QRat.coerce(b)
    if op == "mul":
        return a * QRat.coerce(b)
    if op == "inv":
        return a.inv()
    if op == "bar":
        return a.bar()
    raise ValueError("unknown operation %r" % op)


def _series_div(poly_coeffs, factors, n):
    """First n power-series coefficients of poly / prod (1 - q^m)^e."""
    out = list(poly_coeffs[:n]) + [0] * max(0, n - len(poly_coeffs))
    for m, e in factors:
        for _ in range(e):
            for i in range(m, n):
                out[i] += out[i - m]
    return out


def split_laurent_proper(f):
    """Return ``(laurent, proper)`` with ``f = laurent + proper``.

    ``proper`` vanishes at q = oo, is regular at q = 0 and keeps the
    root-of-unity denominator of ``f``; ``laurent`` is a QLaurent.
    """
    f = QRat.coerce(f)
    if not f._den:
        return f._num, QRat.coerce(0)
    low, poly, cden = f._num._low, f._num._num, f._num._den
    D = den_poly(f._den)
    head = _POLY_ZERO
    if low < 0:
        k = -low
        c = _ZP(_series_div([int(x) for x in poly.coeffs()], f._den, k))
        rest = poly - D * c
        # the k lowest coefficients of rest vanish by construction
        head = c
        poly = rest.right_shift(k)
        low = 0
    elif low > 0:
        poly = poly.left_shift(low)
        low = 0
    quo, rem = divmod(poly, D)
    lau = QLaurent._raw(0, quo, cden)
    if not head.is_zero():
        lau = lau + QLaurent._raw(f._num._low, head, cden)
    proper = QRat._from_parts(0, rem, cden, f._den)
    return lau, proper


@dataclass(frozen=True)
class OneMinusQExpansion:
    """``sum_k coefficients[k] * (1 - q)^k``; trailing zeros are trimmed."""

    coefficients: tuple = ()

    def __post_init__(self):
        cs = [as_rational(c) for c in self.coefficients]
        while cs and not cs[-1]:
            cs.pop()
        object.__setattr__(self, "coefficients", tuple(cs))

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, k):
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return Fraction(0)

    def __iter__(self):
        return iter(self.coefficients)

    def to_laurent(self) -> QLaurent:
        out = QLaurent()
        base = QLaurent({0: 1, 1: -1})
        power = QLaurent.constant(1)
        for c in self.coefficients:
            if c:
                out = out + power * c
            power = power * base
        return out

    def eval(self, value):
        u = 1 - as_rational(value)
        return sum((c * u ** k for k, c in enumerate(self.coefficients)), Fraction(0))


def expand_one_minus_q(p) -> OneMinusQExpansion:
    if isinstance(p, QRat):
        lp = p.as_laurent()
        if lp is None:
            raise NotPolynomialInQ("%s has a pole" % p)
        p = lp
    p = QLaurent.coerce(p)
    if p.is_zero():
        return OneMinusQExpansion(())
    if p._low < 0:
        raise NotPolynomialInQ("q^%d present in %s" % (p._low, p))
    poly = p._num.left_shift(p._low) if p._low else p._num
    comp = poly(_ZP([1, -1]))
    return OneMinusQExpansion(tuple(Fraction(int(c), p._den) for c in comp.coeffs()))


def eval_q(p, value):
    """Exact value of a QLaurent (or QRat) at a rational q."""
    if isinstance(p, (QLaurent, QRat)):
        return p.eval(value)
    return as_rational(p)


@dataclass(frozen=True)
class RationalSpectrum:
    """Rational roots of a polynomial plus the root-free cofactor (ascending)."""

    roots: tuple = ()
    cofactor: tuple = (Fraction(1),)

    @property
    def has_irrational(self):
        return len(self.cofactor) > 1

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def rational_eigenvalues(charpoly) -> RationalSpectrum:
    """Rational roots with multiplicity of a monic polynomial.

    ``charpoly`` lists coefficients in ascending order (constant term first).
    """
    cs = [as_rational(c) for c in charpoly]
    while cs and not cs[-1]:
        cs.pop()
    if not cs:
        raise ValueError("zero polynomial has no spectrum")
    poly = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in cs])
    roots = []
    rest = poly
    for r, mult in poly.roots():
        roots.append((as_rational(r), int(mult)))
        rest = rest / (flint.fmpq_poly([-r, 1]) ** mult)
    lead = rest.coeffs()[-1]
    cof = tuple(as_rational(c / lead) for c in rest.coeffs())
    roots.sort()
    return RationalSpectrum(tuple(roots), cof)
