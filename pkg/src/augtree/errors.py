"""Exception taxonomy shared across the toolkit.

The CLI maps these to exit codes: ConfigError -> 2, BudgetExceededError -> 3,
UnsupportedOperationError -> 4, anything else -> 5.
"""


class AugtreeError(Exception):
    """Base class for toolkit errors."""


class ConfigError(AugtreeError):
    """Malformed input file, bad parameter value, inconsistent options."""


class BudgetExceededError(AugtreeError):
    """A construction would exceed its declared vertex/size budget."""


class UnsupportedOperationError(AugtreeError):
    """Operation is outside the supported regime (and silently guessing would lie)."""


class ClassificationUnstableError(AugtreeError):
    """Isomorphism-class bookkeeping disagreed between representatives."""


class SolverError(AugtreeError):
    """A linear solve failed its residual or conditioning check."""


class InternalError(AugtreeError):
    """Invariant violation inside the toolkit; always a bug."""
