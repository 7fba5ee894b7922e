"""Parse arithmetic expressions such as ``(1-a1)^3 - Q1*(1-a1*a2)``.

The grammar is Python's expression grammar restricted to numbers, names,
+ - * /, integer powers (``^`` or ``**``), parentheses and ``exp(...)``.
Evaluation is delegated to a caller-supplied name table, so the same parser
feeds relation checks (polynomials) and golden ExpPoly fixtures.
"""
from __future__ import annotations

import ast
from fractions import Fraction

from .errors import ParseError


class Poly:
    """Sparse polynomial {exponent tuple: Fraction} in a fixed variable list."""

    __slots__ = ("nvars", "terms")

    def __init__(self, terms, nvars):
        self.nvars = nvars
        self.terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def var(cls, i, nvars):
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): Fraction(1)}, nvars)

    @classmethod
    def const(cls, c, nvars):
        return cls({(0,) * nvars: Fraction(c)}, nvars)

    def _lift(self, x):
        return x if isinstance(x, Poly) else Poly.const(x, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Poly(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0) + va * vb
        return Poly(out, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            if set(other.terms) != {(0,) * self.nvars}:
                raise ParseError("division by a non-constant")
            other = other.terms[(0,) * self.nvars]
        return Poly({k: v / Fraction(other) for k, v in self.terms.items()}, self.nvars)

    def __pow__(self, n):
        out = Poly.const(1, self.nvars)
        for _ in range(n):
            out = out * self
        return out


def _prepare(text):
    return text.replace("^", "**").replace("−", "-")


def evaluate(text, names, functions=None):
    """Evaluate ``text`` with ``names`` mapping identifiers to ring elements."""
    functions = functions or {}
    try:
        tree = ast.parse(_prepare(text), mode="eval")
    except SyntaxError as exc:
        raise ParseError("cannot parse %r: %s" % (text, exc.msg))

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            if isinstance(node.value, float):
                return Fraction(str(node.value))
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ParseError("unknown symbol %r" % node.id)
            return names[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = ev(node.left)
                expo = ev(node.right)
                if not (isinstance(expo, Fraction) and expo.denominator == 1 and expo >= 0):
                    raise ParseError("exponents must be non-negative integers")
                return base ** int(expo)
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
            raise ParseError("unsupported operator in %r" % text)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1:
            fn = functions.get(node.func.id)
            if fn is None:
                raise ParseError("unknown function %r" % node.func.id)
            return fn(ev(node.args[0]))
        raise ParseError("unsupported syntax in %r" % text)

    return ev(tree)


def parse_polynomial(text, variables):
    """Polynomial in the named variables, as a ``Poly``."""
    n = len(variables)
    names = {v: Poly.var(i, n) for i, v in enumerate(variables)}
    out = evaluate(text, names)
    return out if isinstance(out, Poly) else Poly.const(out, n)


def parse_exppoly(text, variables):
    """ExpPoly in the named coordinates; ``exp`` accepts linear arguments."""
    from .exppoly import ExpPoly

    n = len(variables)
    names = {v: ExpPoly.var(i, n) for i, v in enumerate(variables)}

    def exp(arg):
        arg = ExpPoly.coerce(arg, n)
        lam = [Fraction(0)] * n
        const = Fraction(0)
        for (l, m), c in arg.items():
            if any(l) or sum(m) > 1:
                raise ParseError("exp() needs a linear argument")
            if sum(m) == 0:
                const += c
            else:
                lam[m.index(1)] += c
        if const:
            raise ParseError("exp() arguments must be homogeneous linear")
        return ExpPoly.exp(lam, n)

    out = evaluate(text, names, {"exp": exp})
    return ExpPoly.coerce(out, n)
