"""Exception taxonomy shared across the package.

Every failure the library can signal deliberately derives from
:class:`SpdcError`, so callers can catch one base class at a process
boundary.  The CLI maps each concrete class to a distinct exit code via
:data:`EXIT_CODES`.
"""

from __future__ import annotations


class SpdcError(Exception):
    """Base class for all errors raised deliberately by this package."""


class DomainError(SpdcError):
    """An input parameter lies outside the validity range of a model."""


class EvanescentError(SpdcError):
    """A transverse wavevector exceeds the propagating-wave limit."""


class PhaseMatchingError(SpdcError):
    """No phase-matching solution exists in the searched bracket."""


class QuadratureError(SpdcError):
    """Radial quadrature failed to converge to the requested tolerance.

    The best available estimate is attached so a caller that can tolerate
    the looser accuracy may still proceed.
    """

    def __init__(self, message: str, estimate=None, achieved_change: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_change = achieved_change


class DegenerateInputError(SpdcError):
    """An input matrix or spectrum carries no usable signal."""


class NotMeasurableError(SpdcError):
    """A width measure is undefined for the given profile."""


class DataError(SpdcError):
    """Numerical data violates a structural requirement (shape, symmetry, sign)."""


class GeometryError(SpdcError):
    """A requested sampling geometry leaves the valid image region."""


class FormatError(SpdcError):
    """A serialized stream does not conform to the container layout.

    ``offset`` is the byte position at which decoding failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class ResourceError(SpdcError):
    """A computation was refused because it would exceed a resource cap."""


class ContractError(SpdcError):
    """An internal consistency check failed; indicates a bug upstream."""


# CLI exit codes: 0 is success, 1 unanticipated crash, 2 argparse usage.
EXIT_CODES: dict[type, int] = {
    DomainError: 10,
    EvanescentError: 11,
    PhaseMatchingError: 12,
    QuadratureError: 13,
    DegenerateInputError: 14,
    NotMeasurableError: 15,
    DataError: 16,
    GeometryError: 17,
    FormatError: 18,
    ResourceError: 19,
    ContractError: 20,
}


def exit_code_for(exc: BaseException) -> int:
    """Exit code for an exception instance (most-derived class wins)."""
    for klass in type(exc).__mro__:
        if klass in EXIT_CODES:
            return EXIT_CODES[klass]
    return 1
