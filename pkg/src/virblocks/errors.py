"""Exception hierarchy shared by all virblocks modules."""


class VirblocksError(Exception):
    """Base class for all errors raised by this package."""


class DivisionByZero(VirblocksError, ZeroDivisionError):
    """Division by a zero polynomial or rational function."""


class PoleAtEvaluationPoint(VirblocksError):
    """A denominator vanishes (within tolerance) at the evaluation point."""


class GammaPole(VirblocksError):
    """Gamma evaluated at (or too close to) a nonpositive integer."""


class SelectionRuleViolation(VirblocksError):
    """A requested label triple violates the selection rules."""


class SingularBasis(VirblocksError):
    """An exact linear solve met a singular basis; indicates a bug."""


class NotAdmissible(VirblocksError):
    """The given weight sequence is not admissible for the given labels."""


class IndicialDenominatorZero(VirblocksError):
    """An indicial denominator vanished identically; indicates a bug."""


class TruncationUnderflow(VirblocksError):
    """Requested output order exceeds what the input truncation supports."""


class DomainViolation(VirblocksError):
    """Evaluation point lies outside the required domain."""
