"""Exception hierarchy.

Every error a caller can provoke with bad input derives from
:class:`DomainError`; the CLI maps these to exit status 1.
"""


class DomainError(Exception):
    """Base class for input and numerical errors raised by cmfib."""


class InconsistentDataError(DomainError, ValueError):
    """Intersection data violates a structural identity."""


class SolvabilityError(DomainError, ValueError):
    """A torus PDE has no solution because its data integrates wrongly."""


class DensityCollapseError(DomainError, RuntimeError):
    """The volume density 1 - Δφ/2 stopped being positive."""


class TauSyntaxError(DomainError, ValueError):
    """Malformed modulus expression; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class TauDomainError(DomainError, ValueError):
    """A modulus expression left the upper half plane or became non-finite."""
