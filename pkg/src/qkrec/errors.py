"""Exception hierarchy shared by every layer of the engine.

Errors that carry a ``location`` attach the offending degree / entry so a
failed verification can be traced without rerunning.
"""


class QKError(Exception):
    """Base class for all engine errors."""

    def __init__(self, message="", location=None):
        super().__init__(message)
        self.location = location


# scalars
class InversionOfZero(QKError, ZeroDivisionError):
    pass


class NotInvertible(QKError, ArithmeticError):
    """Inverse exists over Q(q) but has a pole away from q = 0 and roots of unity."""


class EvalAtPole(QKError, ZeroDivisionError):
    pass


class NotPolynomialInQ(QKError, ValueError):
    pass


class SplitLeavesResidue(QKError, ArithmeticError):
    pass


# exponential polynomials / ODE
class AnsatzInsufficient(QKError, ArithmeticError):
    """The exponential-polynomial ansatz cannot represent the ODE solution."""


class DimensionMismatch(QKError, ValueError):
    pass


# series
class CutoffMismatch(QKError, ValueError):
    pass


class CoefficientRingLacksQ(QKError, TypeError):
    pass


class SingularLeadingTerm(QKError, ArithmeticError):
    pass


# targets
class ValidationFailure(QKError, ValueError):
    def __init__(self, message="", invariant=None, location=None):
        super().__init__(message, location)
        self.invariant = invariant


class SingularBasisChange(ValidationFailure):
    pass


class IdentityNotPreserved(ValidationFailure):
    pass


class NotAvailable(QKError, LookupError):
    pass


# reconstruction
class NotLaurent(QKError, ArithmeticError):
    """A shift-operator entry that must be Laurent in q has a genuine pole."""


class QDependentPairing(QKError, ArithmeticError):
    pass


class InconsistentKnownData(QKError, ArithmeticError):
    pass


class ResidualNonzero(QKError, ArithmeticError):
    pass


class SylvesterSingular(QKError, ArithmeticError):
    pass


class InconsistentAcrossPicardDirections(QKError, ArithmeticError):
    pass


class DegreeBeyondCutoff(QKError, ValueError):
    pass


class MismatchAtDegree(QKError, ArithmeticError):
    pass


class ParseError(QKError, ValueError):
    pass
