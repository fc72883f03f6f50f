"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


class NotAdmissible(WorkbenchError):
    """A flat word is not a member of the admissible-word language."""

    def __init__(self, position, reason):
        super().__init__(f"not admissible at position {position}: {reason}")
        self.position = position
        self.reason = reason


class NotApplicable(WorkbenchError):
    """Rule does not apply to the given admissible word."""


class IndexOutOfRange(WorkbenchError):
    """Part or relator index outside the valid range."""


class BudgetExceeded(WorkbenchError):
    """A run hit its step budget; carries the partial trace when available."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotFound(WorkbenchError):
    """Search strategy exhausted its options without reaching the target."""


class NoApplicableRule(WorkbenchError):
    """No rule applies (only raised when a caller insists on progress)."""


class InvalidAlphabet(WorkbenchError):
    """Alphabet violates a builder's preconditions."""


class BoundViolation(WorkbenchError):
    """A measured quantity left its mandated window."""


class ShapeError(WorkbenchError):
    """Machine rule not in the shape a construction requires."""


class MidSimulation(WorkbenchError):
    """Word still carries decorated p-letters from an unfinished step."""


class CopyLeak(WorkbenchError):
    """Word carries letters from the working copy alphabet."""


class KappaCollision(WorkbenchError):
    """Word already contains kappa letters."""


class AlphabetMismatch(WorkbenchError):
    """Supplied letters do not fit the declared alphabet."""


class UnrecognizedShape(WorkbenchError):
    """Command matches neither normalized command form."""


class NonPositive(WorkbenchError):
    """Argument must be positive."""


class DomainError(WorkbenchError):
    """Numeric argument outside the formula's domain."""


class GTableMiss(WorkbenchError):
    """A required g-value has not been measured."""

    def __init__(self, n):
        super().__init__(f"g({n}) has not been measured")
        self.n = n


class EpsilonTooLarge(WorkbenchError):
    """Interval exponent must be below 1/4."""
