"""Exception types raised by the operator algebra.

Both subclass built-ins so callers that only care about "bad input" versus
"numerics failed" can keep catching ValueError / RuntimeError.
"""


class DomainError(ValueError):
    """An atom was evaluated or integrated where it is not defined (t = 0 for t^(-k))."""


class NumericalError(RuntimeError):
    """A numerical procedure did not reach its tolerance, or two verdicts disagree."""
