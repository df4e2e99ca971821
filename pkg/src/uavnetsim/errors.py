"""Exception types raised across the package."""

from __future__ import annotations


class UavNetError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidPolygonError(UavNetError):
    """Polygon input violates a structural requirement."""


class MatrixFormatError(UavNetError):
    """Binary matrix file is ragged or contains non-binary values."""


class InvalidParameterError(UavNetError):
    """A numeric argument is outside its valid range."""


class EmptyAreaError(UavNetError):
    """Coverage grid contains no active cell."""


class EmptyFleetError(UavNetError):
    """Operation requires at least one drone."""


class DegenerateNetworkError(UavNetError):
    """Link graph construction needs at least two drones."""


class BelowReferenceDistanceError(UavNetError):
    """Link distance is below the model's reference distance."""


class InvalidStateError(UavNetError):
    """Battery state is outside the [0, 1] level range."""


class DeadLinkError(UavNetError):
    """Transmission requested over a zero-capacity link."""


class NoRouteError(UavNetError):
    """No usable path exists between source and sink."""


class NoSourcesError(UavNetError):
    """Activation cannot pick any source drone."""


class ScenarioError(UavNetError):
    """Scenario file is missing, malformed, or inconsistent."""


class CapacityExhaustedError(UavNetError):
    """Every candidate path hit zero residual capacity before the job finished.

    Carries the number of bits that could not be allocated.
    """

    def __init__(self, shortfall_bits: float, message: str | None = None):
        self.shortfall_bits = shortfall_bits
        if message is None:
            message = f"residual capacity exhausted with {shortfall_bits:.0f} bits left to allocate"
        super().__init__(message)
