"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`PosDefError`.
The CLI maps :class:`ConsistencyError` to exit code 4 and every other
:class:`PosDefError` to exit code 3.
"""

from __future__ import annotations


class PosDefError(Exception):
    """Base class for all library errors."""


class ShapeError(PosDefError, ValueError):
    pass


class InvalidOrderError(PosDefError, ValueError):
    pass


class TableSizeError(PosDefError, ValueError):
    pass


class AxiomError(PosDefError, ValueError):
    """A multiplication table violates a group axiom.

    ``witness`` holds the offending element indices, e.g. ``(a, b, c)`` for a
    failed associativity check.
    """

    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


class MorphismError(PosDefError, ValueError):
    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


class NotHermitianError(PosDefError, ValueError):
    def __init__(self, message, deviation=float("nan")):
        super().__init__(message)
        self.deviation = deviation


class NotPositiveError(PosDefError, ValueError):
    """Raised where a positive semidefinite input is required but not given."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotContractionError(PosDefError, ValueError):
    def __init__(self, message, norm=float("nan")):
        super().__init__(message)
        self.norm = norm


class SymmetryError(PosDefError, ValueError):
    def __init__(self, message, witness=None, deviation=float("nan")):
        super().__init__(message)
        self.witness = witness
        self.deviation = deviation


class CommutationError(PosDefError, ValueError):
    def __init__(self, message, witness=(), norm=float("nan")):
        super().__init__(message)
        self.witness = tuple(witness)
        self.norm = norm


class NormalityError(PosDefError, ValueError):
    def __init__(self, message, witness=None, norm=float("nan")):
        super().__init__(message)
        self.witness = witness
        self.norm = norm


class SingularityError(PosDefError, ValueError):
    pass


class DomainError(PosDefError, ValueError):
    pass


class PreconditionError(PosDefError, ValueError):
    pass


class SnappingError(PosDefError, ValueError):
    pass


class StructureError(PosDefError, ValueError):
    """A structure decomposition violates one of its invariants."""

    def __init__(self, message, invariant=""):
        super().__init__(message)
        self.invariant = invariant


class ConstructionError(PosDefError, RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ConsistencyError(PosDefError, RuntimeError):
    """Two independent computational routes disagreed."""
