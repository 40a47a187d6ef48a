"""Exception and warning types shared across the package.

Errors are raised for contract violations the caller must fix; warnings are
emitted when the library degrades gracefully (dropped series, floored
variances) and continues.
"""


class StateAlignError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(StateAlignError):
    """An argument violated a documented precondition."""


class SegmentTooShort(StateAlignError):
    """The series segment has too few observations to fit a model."""


class DegenerateSeries(StateAlignError):
    """The series is (near-)constant; no model can be fitted."""


class NumericalBreakdown(StateAlignError):
    """A variance or innovation term left its valid range during recursion."""


class EmptySequence(StateAlignError):
    """An alignment was requested for an empty state sequence."""


class AlphabetMismatch(StateAlignError):
    """Two state sequences use incompatible state alphabets."""


class ShiftTooLarge(StateAlignError):
    """A shift magnitude is out of range for the sequence length."""


class BadDistanceMatrix(StateAlignError):
    """A pairwise distance matrix is not symmetric/non-negative/zero-diagonal."""


class MissingLabels(StateAlignError):
    """Ground-truth labels were required but absent for some series."""


class SpecInvalid(StateAlignError):
    """A simulation spec field is out of range or inconsistent."""


class ConfigError(StateAlignError):
    """A pipeline config field is out of range or inconsistent."""


class ParseError(StateAlignError):
    """An input file could not be parsed; row/column context is included."""


class DegenerateFitWarning(UserWarning):
    """An estimated variance hit its floor; results may be less informative."""


class DegenerateSeriesWarning(UserWarning):
    """A constant series forced a fallback value instead of a computed one."""


class StabilityWarning(UserWarning):
    """User-supplied model parameters imply an unstable state recursion."""


class IrregularStrideWarning(UserWarning):
    """A series was dropped because its sampling stride is irregular."""


class InsufficientOverlapWarning(UserWarning):
    """A series was dropped because it does not cover the shared window."""
