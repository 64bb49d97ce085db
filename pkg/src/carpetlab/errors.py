"""Exception types shared across the library.

Every error that callers are expected to handle has its own class so that
test suites and the CLI can catch them precisely.  Validation problems are
``ValueError`` subclasses, budget/precision problems subclass
``RuntimeError`` (the CLI maps the former to exit code 1, the latter to 2).
"""


class CarpetError(Exception):
    """Base class for all library-specific errors."""


class SumNotOne(CarpetError, ValueError):
    """Weight matrix does not sum to exactly one."""


class BadShape(CarpetError, ValueError):
    """Weight matrix has the wrong shape or negative entries."""


class OrderViolation(CarpetError, ValueError):
    """Alphabet sizes must satisfy 2 <= m < n."""


class DepthMismatch(CarpetError, ValueError):
    """Fiber word is deeper than the base word."""


class ZeroMassCylinder(CarpetError, ValueError):
    """Attempted to renormalize on a cylinder of measure zero."""


class InsufficientDepth(CarpetError, ValueError):
    """Stored words are too short for the requested operation."""


class PrecisionExhausted(CarpetError, RuntimeError):
    """Working precision cannot certify a floor/threshold decision."""


class IncompatibleSpecs(CarpetError, ValueError):
    """Two measures live over different alphabets."""


class NotPsiForm(CarpetError, TypeError):
    """Operation requires a measure in parametrized product form."""


class ResolutionTooCoarse(CarpetError, ValueError):
    """Entropy scale is below the resolution of the discrete measure."""


class BudgetExceeded(CarpetError, RuntimeError):
    """Requested enumeration exceeds the configured memory/work budget."""


class DegenerateRange(CarpetError, ValueError):
    """Scale range for a slope fit is empty or degenerate."""


class TooFewPoints(CarpetError, ValueError):
    """Point cloud is too small for the requested statistic."""
