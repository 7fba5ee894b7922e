"""Independent sympy checks of the printed Fl3 shift operators.

Reads the two 6x6 matrices from the golden fixture and verifies, without the
engine: that they commute, that they satisfy both q = 1 relations, that the
operator algebra they generate has dimension six at generic Q (the classical
rank; the two relations alone cut out nine points, so they do not generate
every relation), and that A1 + 2 A2 has a squarefree characteristic
polynomial at Q1 = Q2 = 1 while A1 and A2 alone do not.

    python3 scripts/fl3_oracle.py
"""
import json
import sys
from pathlib import Path

import sympy

GOLDEN = Path(__file__).resolve().parent.parent / "src" / "qkrec" / "data" / "golden.json"
Q1, Q2, a1, a2, x = sympy.symbols("Q1 Q2 a1 a2 x")


def printed():
    doc = json.loads(GOLDEN.read_text())
    by_id = {e["id"]: e for e in doc["entries"]}
    mats = [sympy.Matrix([[sympy.sympify(c.replace("^", "**")) for c in row]
                          for row in by_id[k]["expected"]]) for k in ("fl3.A1", "fl3.A2")]
    return mats, by_id["fl3.relations"]["expected"]


def relation_holds(expr, A1, A2):
    poly = sympy.Poly(sympy.sympify(expr.replace("^", "**")), a1, a2)
    I = sympy.eye(6)
    total = sympy.zeros(6, 6)
    for (i, j), c in zip(poly.monoms(), poly.coeffs()):
        total += c * (A1 ** i) * (A2 ** j) if (i or j) else c * I
    return total.expand() == sympy.zeros(6, 6)


def standard_monomials(relations, values):
    gens = [sympy.sympify(r.replace("^", "**")).subs(values) for r in relations]
    G = sympy.groebner(gens, a1, a2, order="grevlex")
    leads = [sympy.Poly(g, a1, a2).monoms(order="grevlex")[0] for g in G.exprs]
    count = 0
    for i in range(12):
        for j in range(12):
            if not any(i >= li and j >= lj for li, lj in leads):
                count += 1
    return count


def algebra_dimension(A1, A2, values):
    B1, B2 = A1.subs(values), A2.subs(values)
    rows = [list((B1 ** i * B2 ** j).reshape(1, 36)) for i in range(4) for j in range(4)]
    return sympy.Matrix(rows).rank()


def squarefree_at_one(M):
    p = M.subs({Q1: 1, Q2: 1}).charpoly(x).as_expr()
    return sympy.degree(sympy.gcd(p, sympy.diff(p, x)), x) == 0, sympy.expand(p)


def main():
    (A1, A2), relations = printed()
    results = []
    results.append(("A1 A2 = A2 A1", (A1 * A2 - A2 * A1).expand() == sympy.zeros(6, 6)))
    for r in relations:
        results.append(("relation %s" % r, relation_holds(r, A1, A2)))
    for values in ({Q1: 2, Q2: 3}, {Q1: sympy.Rational(-1, 5), Q2: 7}):
        where = "(Q1, Q2) = (%s, %s)" % tuple(values.values())
        print("standard monomials of the two relations at %s: %d" % (
            where, standard_monomials(relations, values)))
        results.append(("operator algebra of dimension 6 at %s" % where,
                        algebra_dimension(A1, A2, values) == 6))
    for label, M, want in (("A1", A1, False), ("A2", A2, False), ("A1 + 2 A2", A1 + 2 * A2, True)):
        ok, p = squarefree_at_one(M)
        print("charpoly of %s at Q = 1: %s" % (label, p))
        results.append(("%s squarefree at Q = 1 is %s" % (label, want), ok == want))
    for name, ok in results:
        print("%s  %s" % ("ok  " if ok else "FAIL", name))
    return 0 if all(ok for _, ok in results) else 1


if __name__ == "__main__":
    sys.exit(main())
