"""Recompute the CP^2 invariant tables and diff them against the fixtures.

    python3 scripts/cp2_tables.py                 # compare all three degrees
    python3 scripts/cp2_tables.py --csv OUTDIR    # also write degree_<d>.csv

Entry (i, j) of the degree-d table is <H^i, pt^j>_{0, i+j, d}, with H the
hyperplane class 1 - P^-1 and pt its square.
"""
import argparse
import csv
import sys
import time
from pathlib import Path

from qkrec import full_theory, preset
from qkrec.bigrec import invariant_table
from qkrec.golden import load_tables, table_checksum


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", type=Path, help="directory for the recomputed tables")
    args = ap.parse_args(argv)
    tables = load_tables()
    start = time.perf_counter()
    state = full_theory(preset("cp2"), max(tables))
    print("reconstructed CP^2 to Q^%d in %.1f s" % (max(tables), time.perf_counter() - start))
    failures = 0
    for d, fixture in sorted(tables.items()):
        rows, cols = fixture["rows"], fixture["cols"]
        got = [[int(v) for v in row]
               for row in invariant_table(state, (d,), "H", "pt", rows, cols)]
        if table_checksum(fixture["values"]) != fixture["sha256"]:
            print("degree %d: fixture checksum mismatch" % d)
            failures += 1
        diff = [(i, j) for i in range(rows) for j in range(cols)
                if got[i][j] != fixture["values"][i][j]]
        largest = max((abs(v) for row in got for v in row), default=0)
        print("degree %d (%dx%d): %s, largest |entry| %d" % (
            d, rows, cols, "exact match" if not diff else "%d cells differ, e.g. %s" % (
                len(diff), diff[:3]), largest))
        failures += bool(diff)
        if args.csv:
            args.csv.mkdir(parents=True, exist_ok=True)
            with open(args.csv / ("degree_%d.csv" % d), "w", newline="") as fh:
                csv.writer(fh).writerows(got)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
