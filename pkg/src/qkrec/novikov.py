"""Truncated power series in the Novikov variables Q_1..Q_r.

Degrees are plain tuples of non-negative ints; the grading is the total
degree sum(d), and every series carries a total-degree cutoff above which
terms are silently dropped.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product

from .errors import CutoffMismatch, DimensionMismatch, SingularLeadingTerm
from .linalg import Mat, _qshift_entry

Degree = tuple


def total(d) -> int:
    return sum(d)


def degree_key(d):
    """Increasing total degree, ties broken lexicographically."""
    return (sum(d), tuple(d))


@lru_cache(maxsize=None)
def degrees_upto(r, cutoff):
    out = [d for d in product(range(cutoff + 1), repeat=r) if sum(d) <= cutoff]
    return tuple(sorted(out, key=degree_key))


@lru_cache(maxsize=None)
def degrees_of_total(r, n):
    return tuple(d for d in degrees_upto(r, n) if sum(d) == n)


@lru_cache(maxsize=None)
def splittings(d):
    """All (d1, d2) with d1 + d2 = d componentwise."""
    out = []
    for d1 in product(*(range(x + 1) for x in d)):
        out.append((d1, tuple(x - y for x, y in zip(d, d1))))
    return tuple(out)


def is_zero_coeff(c):
    if isinstance(c, Mat):
        return c.is_zero()
    return not c


class NovikovSeries:
    """Immutable truncated series ``sum_d terms[d] Q^d``."""

    __slots__ = ("r", "cutoff", "_terms")

    def __init__(self, terms=None, r=1, cutoff=0):
        self.r = r
        self.cutoff = cutoff
        out = {}
        for d, c in (terms or {}).items():
            d = tuple(int(x) for x in d)
            if len(d) != r or any(x < 0 for x in d):
                raise DimensionMismatch("bad degree %s for r=%d" % (d, r))
            if sum(d) <= cutoff and not is_zero_coeff(c):
                out[d] = c
        self._terms = out

    @classmethod
    def _raw(cls, terms, r, cutoff):
        obj = cls.__new__(cls)
        obj.r, obj.cutoff, obj._terms = r, cutoff, terms
        return obj

    @classmethod
    def constant(cls, c, r, cutoff):
        return cls({(0,) * r: c}, r, cutoff)

    # -- access -------------------------------------------------------------
    def __getitem__(self, d):
        return self._terms.get(tuple(d))

    def get(self, d, default=None):
        return self._terms.get(tuple(d), default)

    def degrees(self):
        return sorted(self._terms, key=degree_key)

    def items(self):
        return [(d, self._terms[d]) for d in self.degrees()]

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def max_degree(self):
        return max((sum(d) for d in self._terms), default=-1)

    def truncate(self, cutoff):
        return NovikovSeries(self._terms, self.r, min(cutoff, self.cutoff))

    def map(self, fn):
        return NovikovSeries({d: fn(c) for d, c in self._terms.items()}, self.r, self.cutoff)

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, NovikovSeries):
            raise TypeError("expected a NovikovSeries")
        if other.r != self.r:
            raise DimensionMismatch("series in %d vs %d variables" % (self.r, other.r))
        if other.cutoff != self.cutoff:
            raise CutoffMismatch("cutoffs %d and %d differ" % (self.cutoff, other.cutoff))

    def __add__(self, other):
        self._check(other)
        out = dict(self._terms)
        for d, c in other._terms.items():
            out[d] = out[d] + c if d in out else c
        return NovikovSeries(out, self.r, self.cutoff)

    def __neg__(self):
        return NovikovSeries._raw({d: -c for d, c in self._terms.items()}, self.r, self.cutoff)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return NovikovSeries({d: c * s for d, c in self._terms.items()}, self.r, self.cutoff)

    def __mul__(self, other):
        if not isinstance(other, NovikovSeries):
            return self.scale(other)
        self._check(other)
        acc = {}
        for d1, a in self._terms.items():
            s1 = sum(d1)
            for d2, b in other._terms.items():
                if s1 + sum(d2) > self.cutoff:
                    continue
                d = tuple(x + y for x, y in zip(d1, d2))
                prod_ = a * b
                acc[d] = acc[d] + prod_ if d in acc else prod_
        return NovikovSeries(acc, self.r, self.cutoff)

    def qshift(self, i, power=1):
        """Coefficient at d multiplied by q^{power * d_i}."""
        out = {}
        for d, c in self._terms.items():
            k = power * d[i]
            if k == 0:
                out[d] = c
            elif isinstance(c, Mat):
                out[d] = c.qshift(k)
            else:
                out[d] = _qshift_entry(c, k)
        return NovikovSeries._raw(out, self.r, self.cutoff)

    def __eq__(self, other):
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        if (self.r, self.cutoff) != (other.r, other.cutoff):
            return False
        for d in set(self._terms) | set(other._terms):
            a, b = self._terms.get(d), other._terms.get(d)
            if a is None or b is None:
                if not is_zero_coeff(a if b is None else b):
                    return False
            elif not (a == b):
                return False
        return True

    __hash__ = None

    def to_json(self, coeff_json):
        return {"cutoff": self.cutoff,
                "terms": [{"d": list(d), "c": coeff_json(c)} for d, c in self.items()]}

    def __repr__(self):
        return "NovikovSeries(r=%d, cutoff=%d, %d terms)" % (self.r, self.cutoff, len(self._terms))


def series_arith(a, b, op):
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError("unknown operation %r" % op)


def qshift(a, i, power=1):
    return a.qshift(i, power)


def invert_matrix_series(M: NovikovSeries, M0inv=None) -> NovikovSeries:
    """Graded inverse N_d = -M_0^{-1} sum_{0 < d' <= d} M_{d'} N_{d - d'}.

    ``M0inv`` supplies the inverse of the constant term when it is not a
    rational matrix (e.g. a unipotent exponential over ExpPoly).
    """
    M0 = M[(0,) * M.r]
    if M0 is None:
        raise SingularLeadingTerm("constant term is zero")
    if M0inv is not None:
        pass
    elif M0.is_identity():
        M0inv = M0
    else:
        try:
            M0inv = M0.inverse()
        except (TypeError, AttributeError) as exc:
            raise SingularLeadingTerm("constant term must be rational to invert") from exc
    out = {(0,) * M.r: M0inv}
    for d in degrees_upto(M.r, M.cutoff):
        if not any(d):
            continue
        acc = None
        for d1, d2 in splittings(d):
            if not any(d1):
                continue
            a, b = M.get(d1), out.get(d2)
            if a is None or b is None:
                continue
            term = a * b
            acc = term if acc is None else acc + term
        if acc is None:
            continue
        Nd = -(M0inv * acc) if not M0inv.is_identity() else -acc
        if not Nd.is_zero():
            out[d] = Nd
    return NovikovSeries(out, M.r, M.cutoff)


def identity_series(n, r, cutoff, one=1, zero=None):
    return NovikovSeries.constant(Mat.identity(n, one, zero), r, cutoff)
