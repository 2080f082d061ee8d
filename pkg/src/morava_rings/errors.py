"""Exception hierarchy shared by all modules.

Two bases matter for exit codes: InvariantError (a mathematical check that
must hold failed -- exit 2) and PrecisionExhausted (the requested result is
not representable at the configured precision -- exit 3, rerun with larger
parameters).
"""


class MoravaError(Exception):
    pass


class UsageError(MoravaError):
    pass


class InvariantError(MoravaError):
    """A structural identity that should hold at precision does not."""


class PrecisionExhausted(MoravaError):
    """Raise the precision parameters (nprec / du / dx) and rerun."""


# -- argument / context problems -------------------------------------------

class CtxMismatch(UsageError):
    pass


class InvalidInput(UsageError):
    pass


class BadParams(UsageError):
    pass


class IndexOutOfRange(UsageError):
    pass


class UnknownGenerator(UsageError):
    pass


class TooLarge(UsageError):
    pass


class Unsupported(UsageError):
    pass


class BadGroupOrder(UsageError):
    pass


class NotLocal(UsageError):
    pass


# -- algebraic failures ------------------------------------------------------

class NonUnit(InvariantError):
    pass


class NonzeroConstant(InvariantError):
    pass


class NonUnitLinearTerm(InvariantError):
    pass


class NotSymmetric(InvariantError):
    pass


class NotWeierstrass(InvariantError):
    pass


class MalformedFGL(InvariantError):
    pass


class DivisionFailure(InvariantError):
    pass


class IntegralityFailure(InvariantError):
    pass


class InvariantViolation(InvariantError):
    pass


class ExactDivisionFailure(InvariantError):
    pass


class BasisFailure(InvariantError):
    pass


class NotInGammaInvariants(InvariantError):
    pass


class DigitNonvanishing(InvariantError):
    pass


class RelationFailure(InvariantError):
    pass


class ReductionFailure(PrecisionExhausted):
    pass


class SingularMt(PrecisionExhausted):
    pass


class WitnessNotFound(PrecisionExhausted):
    pass


class Mismatch(InvariantError):
    pass
