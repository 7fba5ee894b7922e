"""Exact reconstruction of genus-zero quantum K-theory from a small J-function.

Layers, bottom up: ``scalarq`` (q-rational scalars), ``exppoly`` (exponential
polynomials and their linear ODEs), ``novikov`` (truncated Novikov series),
``target`` (finite target models), ``smallrec`` (t = 0 theory), ``bigrec``
(t-deformation, T, G, F and invariants), plus ``checks``, ``golden`` and the
``cli`` front end.
"""
from fractions import Fraction as Rational

from .bigrec import (TheoryState, extract_invariants, full_theory, invariant_table, lax_residual,
                     present, reconstruct)
from .exppoly import ExpPoly, OdeProblem, solve_linear_ode
from .novikov import NovikovSeries, invert_matrix_series
from .scalarq import QLaurent, QRat, expand_one_minus_q, split_laurent_proper
from .smallrec import small_theory
from .target import Target, change_basis, load_target, preset

__version__ = "0.1.0"

__all__ = [
    "Rational", "QLaurent", "QRat", "expand_one_minus_q", "split_laurent_proper",
    "ExpPoly", "OdeProblem", "solve_linear_ode", "NovikovSeries", "invert_matrix_series",
    "Target", "change_basis", "load_target", "preset", "small_theory",
    "TheoryState", "reconstruct", "full_theory", "extract_invariants", "invariant_table",
    "lax_residual", "present",
]
