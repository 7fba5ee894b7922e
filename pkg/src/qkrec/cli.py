"""Command-line front end: ``qkrec <subcommand> ...``.

Exit status is 0 on success, 1 when a verification fails and 2 on usage
errors. Every emitted document is built from sorted keys and canonical
"p/q" rationals, so identical invocations give byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .bigrec import extract_invariants, invariant_table, present
from .cache import cached_full_theory
from .checks import run_checks, run_small_checks
from .errors import ParseError, QKError, ValidationFailure
from .exppoly import ExpPoly, default_names
from .golden import StateCache, load_suite, verify_golden
from .linalg import Mat
from .novikov import NovikovSeries
from .scalarq import QLaurent, QRat, format_rational
from .smallrec import (check_relation, finiteness_report, relation_series, semisimple_verdict,
                       semisimplicity_probe, small_theory)
from .target import load_target

PRESETS = ("cp1", "cp2", "cp3", "cp4", "cp5", "fl3")
DEFAULT_CHECK_CUTOFF = {"cp1": 4, "cp2": 3, "fl3": 2}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def render_value(x, names=None):
    """Canonical JSON-able form of any engine value."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, ExpPoly):
        return x.pretty(names)
    if isinstance(x, (QLaurent, QRat)):
        return str(x)
    if isinstance(x, Mat):
        return [[render_value(v, names) for v in row] for row in x.rows]
    if isinstance(x, NovikovSeries):
        return [{"degree": list(d), "value": render_value(v, names)} for d, v in x.items()]
    if isinstance(x, dict):
        return {str(k): render_value(v, names) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [render_value(v, names) for v in x]
    return str(x)


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(prefix + [str(k)], value[k], out)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(prefix + [str(i)], v, out)
    else:
        out.append((".".join(prefix), "" if value is None else str(value)))


def format_document(doc, fmt):
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        rows = []
        _flatten([], doc, rows)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path", "value"])
        w.writerows(rows)
        return buf.getvalue()
    return _pretty(doc) + "\n"


def _pretty(doc, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(doc, dict):
        for k in sorted(doc):
            v = doc[k]
            if isinstance(v, (dict, list)) and v and not _is_flat_row(v):
                lines.append("%s%s:" % (pad, k))
                lines.append(_pretty(v, indent + 1))
            else:
                lines.append("%s%s: %s" % (pad, k, _inline(v)))
    elif isinstance(doc, list):
        if doc and all(_is_flat_row(r) for r in doc):
            for r in doc:
                lines.append(pad + "[" + ", ".join(_inline(x) for x in r) + "]")
        else:
            for v in doc:
                if isinstance(v, (dict, list)):
                    lines.append(pad + "-")
                    lines.append(_pretty(v, indent + 1))
                else:
                    lines.append("%s- %s" % (pad, _inline(v)))
    else:
        lines.append(pad + _inline(doc))
    return "\n".join(lines)


def _is_flat_row(v):
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _inline(v):
    if isinstance(v, list):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, bool):
        return "true" if v else "false"
    return "null" if v is None else str(v)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def parse_basis(text):
    """'1,1;0,-1' -> rational matrix rows."""
    try:
        rows = [[Fraction(x.strip()) for x in row.split(",")] for row in text.split(";")]
    except ValueError:
        raise UsageError("bad --basis %r" % text)
    if any(len(r) != len(rows) for r in rows):
        raise UsageError("--basis must be a square matrix")
    return rows


def parse_insertions(text):
    """'H:2,pt:1' or '1:3' -> [(label or index, multiplicity)]."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        label, _, mult = part.rpartition(":")
        if not label:
            label, mult = mult, "1"
        try:
            m = int(mult)
        except ValueError:
            raise UsageError("bad multiplicity in %r" % part)
        if m < 0:
            raise UsageError("negative multiplicity in %r" % part)
        out.append((int(label) if label.isdigit() else label, m))
    return out


def parse_shape(text):
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise UsageError("--max-table needs RxC, got %r" % text)


def parse_point(text, r):
    try:
        vals = [Fraction(x) for x in text.split(",")]
    except ValueError:
        raise UsageError("bad specialisation %r" % text)
    if len(vals) != r:
        raise UsageError("specialisation needs %d values" % r)
    return tuple(vals)


def _target(args):
    try:
        return load_target(args.target)
    except ValidationFailure as exc:
        raise UsageError(str(exc))


def _names(t):
    return default_names(t.rank)


def default_relations(t):
    if t.picard_rank == 1:
        return ["(1-a)^%d - Q" % t.rank]
    if t.preset == "fl3":
        return ["(1-a1)^3 - Q1*(1-a1*a2)", "(1-a2)^3 - Q2*(1-a1*a2)"]
    return []


# ---------------------------------------------------------------------------
# subcommands; each returns (document, ok)
# ---------------------------------------------------------------------------


def cmd_targets(args):
    out = []
    for name in PRESETS:
        t = load_target(name)
        out.append({"id": name, "name": t.name, "rank": t.rank, "picard_rank": t.picard_rank,
                    "basis": list(t.basis_labels), "aliases": sorted(t.aliases)})
    return {"targets": out, "note": "cpn:N selects projective space of any dimension N"}, True


def cmd_small(args):
    t = _target(args)
    st = small_theory(t, args.qdeg)
    doc = {"target": t.name, "cutoff": args.qdeg, "emit": args.emit}
    ok = True
    if args.emit == "A":
        doc["A"] = [render_value(A) for A in st.shift.A]
    elif args.emit == "products":
        doc["products"] = [render_value(m) for m in st.products]
    elif args.emit == "pairing":
        doc["pairing"] = render_value(st.pairing)
    elif args.emit == "finiteness":
        rep = finiteness_report(st.shift, t, products=st.products)
        doc["finiteness"] = {
            "stable": rep.stable,
            "max_degree": rep.overall(),
            "per_product": {"%d*%d" % k: v for k, v in sorted(rep.max_degree.items())},
        }
    elif args.emit == "relations":
        rels = args.relation or default_relations(t)
        res = {}
        for expr in rels:
            res[expr] = check_relation(st.shift, expr)
        ok = all(res.values())
        doc["relations"] = res
    elif args.emit == "semisimplicity":
        points = [parse_point(p, t.picard_rank) for p in (args.at or [",".join(["1"] * t.picard_rank)])]
        entries = semisimplicity_probe(st.shift, points)
        doc["semisimplicity"] = [
            {"at": [format_rational(v) for v in e.specialization],
             "operator": ("A%d" % (e.picard_index + 1)) if e.picard_index is not None else
             "+".join("%d*A%d" % (c, i + 1) for i, c in enumerate(e.weights)),
             "charpoly": [format_rational(c) for c in e.charpoly],
             "squarefree": e.squarefree} for e in entries]
        doc["semisimple"] = {",".join(format_rational(v) for v in k): v
                             for k, v in semisimple_verdict(entries).items()}
    return doc, ok


def _big_state(args, t):
    return cached_full_theory(t, args.qdeg)


def cmd_big(args):
    t = _target(args)
    st = _big_state(args, t)
    names = _names(t)
    doc = {"target": t.name, "cutoff": args.qdeg, "emit": args.emit, "coordinates": names}
    view = present(st, parse_basis(args.basis)) if args.basis else None
    if view is not None:
        doc["basis"] = args.basis
    if args.emit == "A":
        A = view.A if view is not None else st.big_shift.A
        doc["A"] = [{"%s" % ",".join(map(str, d)): [render_value(m, names) for m in layers]
                     for d, layers in sorted(per.items())} for per in A]
        doc["layout"] = "per Picard index: degree -> [(1-q)^0 layer, (1-q)^1 layer, ...]"
    elif args.emit == "products":
        om = view.omega if view is not None else [dict(s.items()) for s in st.big_products.omega]
        doc["products"] = [{",".join(map(str, d)): render_value(m, names) for d, m in sorted(s.items())}
                           for s in om]
    elif args.emit == "T":
        doc["T"] = render_value(st.T_big, names)
    elif args.emit == "pairing":
        G = view.G if view is not None else dict(st.G_big.items())
        doc["pairing"] = {",".join(map(str, d)): render_value(m, names) for d, m in sorted(G.items())}
    elif args.emit == "potential":
        F = view.F if view is not None else dict(st.F.items())
        doc["potential"] = {",".join(map(str, d)): render_value(f, names) for d, f in sorted(F.items())}
    return doc, True


def cmd_invariants(args):
    t = _target(args)
    degree = tuple(int(x) for x in args.degree.split(","))
    if len(degree) != t.picard_rank:
        raise UsageError("--degree needs %d components" % t.picard_rank)
    cutoff = args.qdeg if args.qdeg is not None else sum(degree)
    st = _big_state(argparse.Namespace(qdeg=cutoff), t)
    doc = {"target": t.name, "degree": list(degree)}
    if args.max_table:
        rows, cols = parse_shape(args.max_table)
        tab = invariant_table(st, degree, args.row_class, args.col_class, rows, cols)
        doc["table"] = render_value(tab)
        doc["layout"] = "entry (i, j) = <%s^i, %s^j>" % (args.row_class, args.col_class)
    elif args.insertions:
        ins = parse_insertions(args.insertions)
        try:
            value = extract_invariants(st, ins, degree)
        except KeyError as exc:
            raise UsageError(str(exc))
        doc["insertions"] = [[str(a), m] for a, m in ins]
        doc["value"] = render_value(value)
    else:
        raise UsageError("give --insertions or --max-table")
    return doc, True


def _check_one(name, cutoff, small_only):
    t = load_target(name)
    if small_only:
        rep = run_small_checks(small_theory(t, cutoff), name)
    else:
        rep = run_checks(cached_full_theory(t, cutoff), name)
    return {"target": name, "cutoff": cutoff, "ok": rep.ok,
            "results": [{"check": r.name, "ok": r.ok, "detail": r.detail} for r in rep.results]}


def cmd_check(args):
    jobs = []
    if args.target:
        for name in args.target:
            cutoff = args.qdeg if args.qdeg is not None else DEFAULT_CHECK_CUTOFF.get(name, 3)
            jobs.append((name, cutoff, args.small_only))
    else:
        jobs = [(n, c, args.small_only) for n, c in sorted(DEFAULT_CHECK_CUTOFF.items())]
        if args.qdeg is not None:
            jobs = [(n, args.qdeg, s) for n, _, s in jobs]
    for name, _, _ in jobs:
        try:
            load_target(name)
        except ValidationFailure as exc:
            raise UsageError(str(exc))
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            reports = list(pool.map(lambda j: _check_one(*j), jobs))
    else:
        reports = [_check_one(*j) for j in jobs]
    ok = all(r["ok"] for r in reports)
    return {"checks": reports, "ok": ok}, ok


def cmd_verify(args):
    try:
        suite = load_suite(args.suite)
    except KeyError as exc:
        raise UsageError(str(exc))
    states = StateCache(builder=cached_full_theory)
    rep = verify_golden(suite, targets=args.target, ids=args.id, threads=args.threads, states=states)
    if not rep.results:
        raise UsageError("no golden entries selected")
    doc = {
        "suite": rep.suite,
        "ok": rep.ok,
        "counts": rep.counts(),
        "entries": [{"id": r.id, "target": r.target, "status": r.status.upper(),
                     "citation": r.citation, "detail": r.detail} for r in rep.results],
    }
    return doc, rep.ok


def cmd_relation(args):
    t = _target(args)
    st = small_theory(t, args.qdeg)
    try:
        residual = relation_series(st.shift, args.expr)
    except ParseError as exc:
        raise UsageError(str(exc))
    doc = {"target": t.name, "cutoff": args.qdeg, "relation": args.expr, "holds": not residual,
           "residual": {",".join(map(str, d)): render_value(list(v)) for d, v in sorted(residual.items())}}
    return doc, not residual


COMMANDS = {
    "targets": cmd_targets, "small": cmd_small, "big": cmd_big, "invariants": cmd_invariants,
    "check": cmd_check, "verify": cmd_verify, "relation": cmd_relation,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("pretty", "json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the document to PATH")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="qkrec", parents=[common],
                                description="Exact genus-zero quantum K-theory reconstruction")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("targets", parents=[common], help="list preset targets")

    s = sub.add_parser("small", parents=[common], help="t = 0 theory from the J-function")
    s.add_argument("--target", required=True)
    s.add_argument("--qdeg", type=int, required=True)
    s.add_argument("--emit", required=True,
                   choices=("A", "products", "pairing", "finiteness", "relations", "semisimplicity"))
    s.add_argument("--relation", action="append", help="relation in a1..ar, Q1..Qr (repeatable)")
    s.add_argument("--at", action="append", help="Novikov specialisation 'v1,...,vr' (repeatable)")

    b = sub.add_parser("big", parents=[common], help="full t-dependent theory")
    b.add_argument("--target", required=True)
    b.add_argument("--qdeg", type=int, required=True)
    b.add_argument("--emit", required=True, choices=("A", "products", "T", "pairing", "potential"))
    b.add_argument("--basis", help="present in Psi = Phi C, C given as 'c00,c01;c10,c11'")

    i = sub.add_parser("invariants", parents=[common], help="K-theoretic GW invariants")
    i.add_argument("--target", required=True)
    i.add_argument("--degree", required=True, help="curve degree, comma separated for r > 1")
    i.add_argument("--qdeg", type=int, help="working cutoff (default: total degree)")
    i.add_argument("--insertions", help="'H:i,pt:j', basis labels or indices with multiplicities")
    i.add_argument("--max-table", help="RxC table of <row^i, col^j>")
    i.add_argument("--row-class", default="H")
    i.add_argument("--col-class", default="pt")

    c = sub.add_parser("check", parents=[common], help="run every structural invariant")
    c.add_argument("--target", action="append")
    c.add_argument("--qdeg", type=int)
    c.add_argument("--small-only", action="store_true")

    v = sub.add_parser("verify", parents=[common], help="compare with the golden data")
    v.add_argument("--suite", default="paper")
    v.add_argument("--target", action="append")
    v.add_argument("--id", action="append")

    r = sub.add_parser("relation", parents=[common], help="test a q = 1 relation")
    r.add_argument("--target", required=True)
    r.add_argument("--qdeg", type=int, required=True)
    r.add_argument("--expr", required=True)
    return p


def run(argv=None, stdout=None):
    """Parse, execute, emit; returns the exit status."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    args.format = getattr(args, "format", "pretty")
    args.out = getattr(args, "out", None)
    args.threads = getattr(args, "threads", 1)
    if args.threads < 1:
        print("qkrec: --threads must be positive", file=sys.stderr)
        return 2
    if getattr(args, "qdeg", None) is not None and args.qdeg < 0:
        print("qkrec: --qdeg must be non-negative", file=sys.stderr)
        return 2
    try:
        doc, ok = COMMANDS[args.command](args)
    except UsageError as exc:
        print("qkrec: %s" % exc, file=sys.stderr)
        return 2
    except QKError as exc:
        print("qkrec: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 1
    text = format_document(doc, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0 if ok else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
