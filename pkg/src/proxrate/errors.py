"""Exception types shared across the package.

The CLI maps these onto its exit codes, so library code should raise the
most specific type that applies rather than bare ValueError/RuntimeError.
"""


class DomainError(ValueError):
    """A parameter lies outside its mathematically valid domain."""


class NonFiniteError(DomainError):
    """A NaN or infinity appeared where a finite quantity is required."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class VerificationError(RuntimeError):
    """A certificate or consistency check failed beyond tolerance."""
