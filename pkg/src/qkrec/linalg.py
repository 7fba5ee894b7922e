"""Small dense matrices over the engine's coefficient rings.

Entries of one matrix share a ring: Fraction, QLaurent, QRat or ExpPoly
(with rational or q-dependent coefficients). Products are accumulated with
the ring's own batched dot product, which matters for QRat (one common
denominator per entry) and ExpPoly (one dictionary pass per entry).
"""
from __future__ import annotations

from fractions import Fraction

import flint

from .errors import CoefficientRingLacksQ, DimensionMismatch, SingularLeadingTerm
from .exppoly import ExpPoly
from .scalarq import QLaurent, QRat, as_rational


def ring_zero_like(x):
    if isinstance(x, ExpPoly):
        return ExpPoly.zero(x.nvars)
    if isinstance(x, QRat):
        return QRat.coerce(0)
    if isinstance(x, QLaurent):
        return QLaurent()
    return Fraction(0)


def ring_dot(pairs, zero):
    pairs = [(a, b) for a, b in pairs if a and b]
    if not pairs:
        return zero
    a0, b0 = pairs[0]
    if isinstance(a0, ExpPoly) or isinstance(b0, ExpPoly):
        nv = a0.nvars if isinstance(a0, ExpPoly) else b0.nvars
        lifted = [(ExpPoly.coerce(a, nv), ExpPoly.coerce(b, nv)) for a, b in pairs]
        return ExpPoly.sum_products(lifted, nv)
    if isinstance(a0, QRat) or isinstance(b0, QRat) or any(
            isinstance(a, QRat) or isinstance(b, QRat) for a, b in pairs):
        return QRat.dot(pairs)
    out = pairs[0][0] * pairs[0][1]
    for a, b in pairs[1:]:
        out = out + a * b
    return out


class Mat:
    """Immutable dense matrix; ``zero`` is the ring zero used for empty sums."""

    __slots__ = ("rows", "nrows", "ncols", "zero")

    def __init__(self, rows, zero=None):
        rows = [list(r) for r in rows]
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        if any(len(r) != self.ncols for r in rows):
            raise DimensionMismatch("ragged matrix")
        if zero is None:
            zero = Fraction(0)
            for r in rows:
                for x in r:
                    if isinstance(x, (ExpPoly, QRat, QLaurent)):
                        zero = ring_zero_like(x)
                        break
                else:
                    continue
                break
        self.zero = zero

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, n, one=Fraction(1), zero=None):
        if zero is None:
            zero = ring_zero_like(one)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], zero)

    @classmethod
    def zeros(cls, n, m=None, zero=Fraction(0)):
        m = n if m is None else m
        return cls([[zero] * m for _ in range(n)], zero)

    @classmethod
    def rational(cls, rows):
        return cls([[as_rational(x) for x in r] for r in rows], Fraction(0))

    @classmethod
    def from_columns(cls, cols, zero=None):
        n = len(cols[0])
        return cls([[cols[j][i] for j in range(len(cols))] for i in range(n)], zero)

    # -- access -------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j):
        return [r[j] for r in self.rows]

    def tolist(self):
        return [list(r) for r in self.rows]

    def entries(self):
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                yield i, j, x

    def is_zero(self):
        return not any(x for r in self.rows for x in r)

    def __bool__(self):
        return not self.is_zero()

    def is_identity(self):
        return all((x == 1) if i == j else (not x) for i, j, x in self.entries())

    # -- arithmetic ---------------------------------------------------------
    def _check_same(self, other):
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise DimensionMismatch("shape %dx%d vs %dx%d" % (
                self.nrows, self.ncols, other.nrows, other.ncols))

    def __add__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        self._check_same(other)
        return Mat([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                   self._zero_pick(other))

    def __sub__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        self._check_same(other)
        return Mat([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                   self._zero_pick(other))

    def __neg__(self):
        return Mat([[-a for a in r] for r in self.rows], self.zero)

    def _zero_pick(self, other):
        if isinstance(self.zero, Fraction):
            return other.zero
        return self.zero

    def __mul__(self, other):
        if isinstance(other, Mat):
            return self.matmul(other)
        return Mat([[a * other for a in r] for r in self.rows],
                   ring_zero_like(self.zero * other) if not isinstance(self.zero, ExpPoly)
                   else self.zero)

    def __rmul__(self, other):
        return Mat([[other * a for a in r] for r in self.rows], self.zero
                   if isinstance(self.zero, ExpPoly) else ring_zero_like(other * self.zero))

    def matmul(self, other):
        if self.ncols != other.nrows:
            raise DimensionMismatch("cannot multiply %dx%d by %dx%d" % (
                self.nrows, self.ncols, other.nrows, other.ncols))
        zero = self._zero_pick(other)
        if isinstance(zero, Fraction) and isinstance(other.zero, Fraction):
            return _rational_matmul(self, other)
        cols = [other.column(j) for j in range(other.ncols)]
        out = []
        for r in self.rows:
            out.append([ring_dot(zip(r, c), zero) for c in cols])
        return Mat(out, zero)

    __matmul__ = matmul

    def mul_vec(self, v):
        return [ring_dot(zip(r, v), self.zero) for r in self.rows]

    def commutator(self, other):
        return self.matmul(other) - other.matmul(self)

    def transpose(self):
        return Mat([list(c) for c in zip(*self.rows)], self.zero)

    def map(self, fn, zero=None):
        out = [[fn(x) for x in r] for r in self.rows]
        if zero is None:
            zero = fn(self.zero) if not isinstance(self.zero, ExpPoly) else None
        return Mat(out, zero)

    def qshift(self, k):
        """Multiply every entry by q^k."""
        if k == 0:
            return self
        return self.map(lambda x: _qshift_entry(x, k), self.zero)

    def bar(self):
        return self.map(_bar_entry, self.zero)

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        return all(a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    __hash__ = None

    def inverse(self):
        """Inverse of a rational matrix (exact)."""
        if self.nrows != self.ncols:
            raise DimensionMismatch("non-square matrix has no inverse")
        if self.is_identity():
            return self
        M = to_fmpq_mat(self)
        if M.det() == 0:
            raise SingularLeadingTerm("matrix is singular")
        return from_fmpq_mat(M.inv())

    def __repr__(self):
        return "Mat(%r)" % (self.rows,)

    def pretty(self, fmt=str):
        cells = [[fmt(x) for x in r] for r in self.rows]
        w = max((len(c) for r in cells for c in r), default=1)
        return "\n".join("[ " + "  ".join(c.rjust(w) for c in r) + " ]" for r in cells)


def _qshift_entry(x, k):
    if isinstance(x, (QRat, QLaurent)):
        return x.shift(k)
    if isinstance(x, ExpPoly):
        return x.map_coefficients(lambda c: _qshift_entry(c, k))
    if not x:
        return x
    raise CoefficientRingLacksQ("q-shift of a rational entry")


def _bar_entry(x):
    if isinstance(x, (QRat, QLaurent)):
        return x.bar()
    if isinstance(x, ExpPoly):
        return x.bar()
    return x


def to_fmpq_mat(m):
    return flint.fmpq_mat(m.nrows, m.ncols,
                          [flint.fmpq(x.numerator, x.denominator)
                           for r in m.rows for x in map(as_rational, r)])


def from_fmpq_mat(M):
    n, k = M.nrows(), M.ncols()
    e = M.entries()
    return Mat([[Fraction(int(e[i * k + j].p), int(e[i * k + j].q)) for j in range(k)]
                for i in range(n)], Fraction(0))


def _rational_matmul(a, b):
    return from_fmpq_mat(to_fmpq_mat(a) * to_fmpq_mat(b))


def charpoly(m):
    """Characteristic polynomial of a rational matrix, ascending coefficients."""
    cp = to_fmpq_mat(m).charpoly()
    return [as_rational(c) for c in cp.coeffs()]


def poly_gcd_is_constant(coeffs):
    p = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in coeffs])
    return p.gcd(p.derivative()).degree() == 0
