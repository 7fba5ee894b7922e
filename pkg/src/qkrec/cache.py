"""Optional on-disk memo of reconstructed A_i and Omega_alpha.

Enabled by the environment variable QK_CACHE_DIR. Entries are JSON files
named by the sha256 of the target document, the cutoff and a format tag, so
a changed target or cutoff never reuses stale data. T, G and F are cheap to
rebuild from A and Omega and are not stored.
"""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from .bigrec import (BigProducts, BigShift, TheoryState, fundamental_solution_T, full_theory,
                     pairing_and_potential)
from .exppoly import ExpPoly
from .linalg import Mat
from .novikov import NovikovSeries
from .smallrec import small_theory

FORMAT = "qkrec-state-1"


def cache_dir():
    path = os.environ.get("QK_CACHE_DIR")
    return Path(path) if path else None


def cache_key(t, cutoff):
    doc = {"format": FORMAT, "cutoff": cutoff, "target": t.to_document(table_cutoff=cutoff)}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _mat_json(m):
    return [[x.to_json() for x in row] for row in m.rows]


def _mat_from(doc, nv):
    return Mat([[ExpPoly.from_json(x, nv) for x in row] for row in doc], ExpPoly.zero(nv))


def dump_state(state: TheoryState):
    nv = state.nvars
    return {
        "format": FORMAT,
        "nvars": nv,
        "cutoff": state.cutoff,
        "A": [[{"d": list(d), "layers": [_mat_json(m) for m in layers]}
               for d, layers in sorted(per.items())] for per in state.big_shift.A],
        "omega": [[{"d": list(d), "m": _mat_json(m)} for d, m in sorted(series.items())]
                  for series in state.big_products.omega],
    }


def load_state(t, doc) -> TheoryState:
    nv, cutoff, r = doc["nvars"], doc["cutoff"], t.picard_rank
    A = [{tuple(e["d"]): [_mat_from(m, nv) for m in e["layers"]] for e in per} for per in doc["A"]]
    omega = [NovikovSeries({tuple(e["d"]): _mat_from(e["m"], nv) for e in series}, r, cutoff)
             for series in doc["omega"]]
    state = TheoryState(t, cutoff, small_theory(t, cutoff), BigShift(r, nv, cutoff, A),
                        BigProducts(omega))
    state.log.append("loaded from cache")
    fundamental_solution_T(state)
    pairing_and_potential(state)
    return state


def cached_full_theory(t, cutoff, directory=None) -> TheoryState:
    """full_theory with the A/Omega layer memoised under ``directory`` (or QK_CACHE_DIR)."""
    directory = Path(directory) if directory else cache_dir()
    if directory is None:
        return full_theory(t, cutoff)
    path = directory / ("%s.json" % cache_key(t, cutoff))
    if path.exists():
        try:
            return load_state(t, json.loads(path.read_text()))
        except (ValueError, KeyError):
            path.unlink()           # unreadable entry: rebuild it below
    state = full_theory(t, cutoff)
    directory.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(dump_state(state), sort_keys=True))
    tmp.replace(path)
    return state
