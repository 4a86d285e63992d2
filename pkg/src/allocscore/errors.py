"""Exception types shared across the package."""


class AllocscoreError(Exception):
    """Base class for all package errors."""


class UnboundedQuantile(AllocscoreError):
    """Quantile requested at a level where the support is unbounded."""


class NonIntegrable(AllocscoreError):
    """Expected shortage requested for a distribution without a finite upper-tail mean."""


class DegenerateTail(AllocscoreError):
    """Tail fit impossible: the extreme quantile pairs do not determine a positive scale."""


class DimensionMismatch(AllocscoreError):
    """Vectors that must be aligned to the same locations have different lengths."""


class NoConvergence(AllocscoreError):
    """Iterative solver exhausted its iteration budget."""


class InfeasibleConstraint(AllocscoreError):
    """The resource constraint exceeds the total supremum of the marginal supports."""


class InfeasibleAllocation(AllocscoreError):
    """An externally supplied allocation violates nonnegativity or the budget."""


class AsymmetricLevels(AllocscoreError):
    """Quantile levels do not form symmetric interval pairs around a median."""


class ParseError(AllocscoreError):
    """A file failed to parse; the message carries the offending line number."""


class CrossedQuantiles(AllocscoreError):
    """Quantile values decrease as the probability level increases."""


class MissingLocation(AllocscoreError):
    """A required location is absent from a forecast group or population table."""


class DuplicateRecord(AllocscoreError):
    """Two input rows share the same (model, location, date, level) key."""


class IoError(AllocscoreError):
    """Reading or writing a report file failed."""
