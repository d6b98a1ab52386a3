"""Exception hierarchy shared by every pickface module."""


class PickfaceError(Exception):
    """Base class for all errors raised by pickface."""


class NonUnitLeading(PickfaceError, ValueError):
    pass


class NonPositive(PickfaceError, ValueError):
    pass


class DepthExceeded(PickfaceError, ValueError):
    """An operator or vector needs more coefficients than the sequence holds."""


class UnboundedAtBoundary(PickfaceError, ValueError):
    """A boundary evaluation was requested for a kernel without a tail bound."""


class AmbiguousElement(PickfaceError, TypeError):
    """The element carries neither a boundary symbol nor a compact flag."""


class OutOfFace(PickfaceError, ValueError):
    pass


class EmptyFace(PickfaceError, ValueError):
    """Support reduction collapsed to ``{0}`` while the trace must be 1."""


class Infeasible(PickfaceError, ValueError):
    """Alternating projections failed within budget (not certified)."""


class AlreadyExtreme(PickfaceError, ValueError):
    pass


class RankDeficient(PickfaceError, ValueError):
    pass


class DegenerateEigenspace(PickfaceError, UserWarning):
    """Warning category: top eigenspace has multiplicity > 1."""
