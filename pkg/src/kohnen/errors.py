"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific type available rather than bare ValueError.
"""

from __future__ import annotations


class KohnenError(Exception):
    """Base class for all package errors."""


class ValidationError(KohnenError):
    """Invalid argument, malformed input file, or violated invariant on load."""


class PrecisionError(KohnenError):
    """A computation needs more precomputed terms than are available.

    Carries `max_usable`, the largest argument the available data supports,
    so callers can report actionable limits.
    """

    def __init__(self, message: str, max_usable: int | float | None = None):
        super().__init__(message)
        self.max_usable = max_usable


class CertificationError(KohnenError):
    """A structural assertion failed (wrong solution-space dimension,
    non-integral coefficients, failed eigenvalue certification)."""


class UndefinedFitError(KohnenError):
    """A least-squares fit was requested on degenerate data."""
