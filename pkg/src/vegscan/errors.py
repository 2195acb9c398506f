"""Exception hierarchy shared across the engine."""


class VegscanError(Exception):
    """Base class for all engine errors."""


class UnknownSensor(VegscanError):
    """Requested platform is not in the sensor registry."""


class RasterIOError(VegscanError):
    """A raster file could not be read or written."""


class UnsupportedGeometry(VegscanError):
    """Raster uses a rotated or otherwise unsupported geotransform."""


class BandNotFound(VegscanError):
    """Requested band does not exist in the file or scene."""


class EmptyRegion(VegscanError):
    """A crop or intersection produced no pixels."""


class GridMismatch(VegscanError):
    """Grids that must share shape and transform do not."""


class EmptyStack(VegscanError):
    """A composite was requested over zero scenes."""


class DegenerateGeometry(VegscanError):
    """Polygon has too few distinct vertices."""


class InvalidRing(VegscanError):
    """Polygon ring is self-intersecting."""


class NoSuchUnit(VegscanError):
    """No feature matches the requested name or hierarchy path."""


class CrsMismatch(VegscanError):
    """Geometries or grids are in different coordinate reference systems."""


class ManifestError(VegscanError):
    """Scene manifest is malformed.

    Carries the offending entry index when one is identifiable.
    """

    def __init__(self, message: str, entry_index: int | None = None):
        super().__init__(message)
        self.entry_index = entry_index


class TransportError(VegscanError):
    """Network-level failure talking to a remote catalog (retryable)."""


class ProtocolError(VegscanError):
    """Remote catalog returned a non-conforming response (not retryable)."""


class PixelBudgetExceeded(VegscanError):
    """Requested analysis covers more pixels than the configured budget."""

    def __init__(self, requested: int, budget: int):
        super().__init__(
            f"analysis covers {requested} pixels, exceeding the budget of {budget}"
        )
        self.requested = requested
        self.budget = budget


class UnknownDataset(VegscanError):
    """No vector dataset registered under the requested name."""


class ValidationFailed(VegscanError):
    """Analysis was requested with parameters that fail validation.

    Carries the full report so callers can surface every violation.
    """

    def __init__(self, report):
        lines = "; ".join(v.message for v in report.violations)
        super().__init__(f"invalid parameters: {lines}")
        self.report = report


class UnknownAnalysis(VegscanError):
    """No stored export matches the requested analysis id."""
