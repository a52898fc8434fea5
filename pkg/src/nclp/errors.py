"""Exception hierarchy.

Every error raised by the library derives from :class:`NclpError`; the CLI
serializes errors by class name, so names are part of the report format.
"""


class NclpError(Exception):
    """Base class for all library errors."""


class AlgebraMismatch(NclpError):
    pass


class NotSelfAdjoint(NclpError):
    pass


class DomainError(NclpError):
    pass


class NotAProjection(NclpError):
    pass


class UndefinedEvaluation(NclpError):
    pass


class UnboundedWeight(NclpError):
    pass


class NotPositive(NclpError):
    pass


class PreconditionFailed(NclpError):
    pass


class BadExponent(NclpError):
    pass


class ExponentMismatch(NclpError):
    pass


class ZeroElement(NclpError):
    pass


class NotIncreasing(NclpError):
    pass


class NotFaithful(NclpError):
    pass


class NotAState(NclpError):
    pass


class DominationFailed(NclpError):
    pass


class NotInvariant(NclpError):
    pass


class NotCommuting(NclpError):
    pass


class QuadratureUnderflow(NclpError):
    pass


class InputError(NclpError):
    """Errors caused by malformed input rather than failed mathematics."""


class SchemaError(InputError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(InputError):
    def __init__(self, invariant: str, message: str = ""):
        super().__init__(f"{invariant}: {message}" if message else invariant)
        self.invariant = invariant


class UnknownCommand(InputError):
    pass
