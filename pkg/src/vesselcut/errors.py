"""Exception hierarchy shared across the package."""


class VesselCutError(Exception):
    """Base class for all errors raised by vesselcut."""


class NetworkError(VesselCutError):
    pass


class NegativeCapacity(NetworkError, ValueError):
    pass


class InvalidNode(NetworkError, ValueError):
    pass


class TooLarge(NetworkError):
    pass


class SegmentationError(VesselCutError):
    """Raised when an image/contour pair cannot be segmented."""


class OpenContour(SegmentationError):
    pass


class EmptyMask(SegmentationError):
    pass


class BandsOverlap(SegmentationError):
    pass


class DimensionMismatch(SegmentationError, ValueError):
    pass


class NoBoundary(SegmentationError):
    pass


class UnsupportedFormat(VesselCutError, ValueError):
    pass


class InvalidProfile(VesselCutError, ValueError):
    pass


class NoOverlap(VesselCutError, ValueError):
    pass


class ManifestError(VesselCutError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
