import os
from fractions import Fraction

import pytest
import sympy
from hypothesis import HealthCheck, settings

from qkrec import full_theory, preset, small_theory
from qkrec.scalarq import QLaurent, QRat

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("QK_HYPOTHESIS_PROFILE", "default"))

q = sympy.Symbol("q")


def laurent_to_sympy(p: QLaurent):
    return sum((sympy.Rational(c.numerator, c.denominator) * q ** k
                for k, c in p.coefficients.items()), sympy.Integer(0))


def qrat_to_sympy(f):
    f = QRat.coerce(f)
    den = sympy.Integer(1)
    for m, e in f.denominator_factors:
        den *= (1 - q ** m) ** e
    return laurent_to_sympy(f.numerator) / den


def sympy_equal(a, b):
    return sympy.cancel(sympy.together(a - b)) == 0


def frac(x):
    return Fraction(x)


# Reconstructions shared across modules; each is built once per session.
@pytest.fixture(scope="session")
def cp1_state():
    return full_theory(preset("cp1"), 4)


@pytest.fixture(scope="session")
def cp2_state():
    return full_theory(preset("cp2"), 3)


@pytest.fixture(scope="session")
def fl3_small():
    return small_theory(preset("fl3"), 6)


@pytest.fixture(scope="session")
def fl3_state():
    return full_theory(preset("fl3"), 2)
