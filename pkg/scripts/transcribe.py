"""Transcribe printed golden data from a LaTeX/Markdown source into fixtures.

Usage:
    python3 scripts/transcribe.py SOURCE.md            # compare with stored fixtures
    python3 scripts/transcribe.py SOURCE.md --write    # regenerate them

Two kinds of data are handled: integer ``array`` blocks (the CP^2 invariant
tables) and the CP^2 degree <= 3 potential, a long LaTeX sum that is turned
into the plain expression syntax read by ``qkrec.exprparse``. The compare mode
prints a sha256 per item and is the review step for the transcription.
"""
import argparse
import hashlib
import json
import re
import sys
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "src" / "qkrec" / "data"
TABLES = DATA / "cp2_tables.json"
GOLDEN = DATA / "golden.json"
BLOCK = re.compile(r"\\begin\s*\{array\}\{(c+)\}(.*?)\\end\s*\{array\}", re.S)
POTENTIAL_ID = "cp2.potential"


def parse_blocks(text):
    tables = []
    for spec, body in BLOCK.findall(text):
        flat = re.sub(r"\s+", "", body.replace(r"\noalign{\medskip}", ""))
        rows = [r for r in flat.split(r"\\") if r]
        parsed = [[int(x) for x in r.split("&")] for r in rows]
        if all(len(r) == len(spec) for r in parsed):
            tables.append(parsed)
    return tables


def latex_to_expr(src):
    s = re.sub(r"\\(left|right)\s*([.()\[\]])", lambda m: "" if m.group(2) == "." else m.group(2), src)
    for junk in (r"\allowdisplaybreaks", r"\scriptsize", r"\qquad", r"\quad", "&", r"\\", r"\,"):
        s = s.replace(junk, " ")
    frac = re.compile(r"\\frac\s*\{([^{}]*)\}\{([^{}]*)\}")
    while frac.search(s):
        s = frac.sub(r"((\1)/(\2))", s)
    s = re.sub(r"\{e\^\{([^{}]*)\}\}", r"exp(\1)", s)
    s = re.sub(r"e\^\{([^{}]*)\}", r"exp(\1)", s)
    s = re.sub(r"e\^([a-z])", r"exp(\1)", s)
    s = re.sub(r"\^\{([^{}]*)\}", r"^(\1)", s)
    for a, b in (("{", "("), ("}", ")"), ("[", "("), ("]", ")")):
        s = s.replace(a, b)
    out = []
    for tok in re.findall(r"exp|\d+|[A-Za-z]|\S", s):
        if out:
            prev = out[-1]
            left = prev == ")" or prev.isdigit() or (prev.isalpha() and prev != "exp")
            if left and (tok == "(" or tok[0].isalnum()):
                out.append("*")
        out.append(tok)
    return "".join(out)


def extract_potential(text):
    start = text.index(r"F_{000}\left( t(1-P^{-1})+ s(1-P^{-1})^2 \right)")
    body = text[start:]
    body = body[body.index("=") + 1:body.index("+ O(Q^4)")]
    return latex_to_expr(body)


def sha(obj):
    return hashlib.sha256(json.dumps(obj, separators=(",", ":")).encode()).hexdigest()


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("source")
    ap.add_argument("--write", action="store_true")
    args = ap.parse_args(argv)
    text = Path(args.source).read_text()
    tables = [t for t in parse_blocks(text) if len(t) >= 13]
    if len(tables) != 3:
        print("expected 3 integer tables, found %d" % len(tables))
        return 1
    tdoc = {
        "citation": "CP2 K-theoretic invariant tables, degrees 1-3; row i = number of [H], column j = number of [pt]",
        "tables": [{"degree": d, "rows": len(t), "cols": len(t[0]), "values": t, "sha256": sha(t)}
                   for d, t in enumerate(tables, start=1)],
    }
    potential = extract_potential(text)
    golden = json.loads(GOLDEN.read_text()) if GOLDEN.exists() else None
    if args.write:
        TABLES.write_text(json.dumps(tdoc, indent=1) + "\n")
        if golden is not None:
            for e in golden["entries"]:
                if e["id"] == POTENTIAL_ID:
                    e["expected"] = potential
                    e["sha256"] = sha(potential)
            GOLDEN.write_text(json.dumps(golden, indent=1) + "\n")
        print("fixtures written")
        return 0
    ok = True
    stored = json.loads(TABLES.read_text())
    for new, old in zip(tdoc["tables"], stored["tables"]):
        same = new["values"] == old["values"] and new["sha256"] == old["sha256"]
        ok &= same
        print("table degree %d %dx%d sha256 %s %s" % (new["degree"], new["rows"], new["cols"],
                                                     new["sha256"][:16], "ok" if same else "DIFFERS"))
    if golden is not None:
        entry = next(e for e in golden["entries"] if e["id"] == POTENTIAL_ID)
        same = entry["expected"] == potential and entry.get("sha256") == sha(potential)
        ok &= same
        print("potential sha256 %s %s" % (sha(potential)[:16], "ok" if same else "DIFFERS"))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
