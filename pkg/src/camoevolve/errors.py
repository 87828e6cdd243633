"""Exception hierarchy for the camoevolve toolkit.

Every error raised by the library derives from CamoError so callers (and the
CLI) can catch one base class. Errors that signal bad argument values also
derive from ValueError.
"""


class CamoError(Exception):
    """Base class for all camoevolve errors."""


class InvalidDimensionError(CamoError, ValueError):
    """Pattern or tile dimensions are not positive integers."""


class InvalidColorError(CamoError, ValueError):
    """A channel value lies outside [0, 255]."""


class PatternFormatError(CamoError, ValueError):
    """A pattern file (PPM or JSON sidecar) could not be parsed.

    ``offset`` is the byte offset at which parsing failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ShapeMismatchError(CamoError, ValueError):
    """Two grids that must share a shape do not."""


class DomainError(CamoError, ValueError):
    """A scalar argument lies outside its documented domain."""


class InsufficientPopulationError(CamoError, ValueError):
    """Standardization needs at least two candidate scores."""


class IncompleteEvaluationError(CamoError):
    """The candidate-by-transformation score grid has missing cells."""


class InvalidBoxError(CamoError, ValueError):
    """A bounding box has non-positive width or height."""


class NoGroundTruthError(CamoError, ValueError):
    """Image-level IoU requires at least one unpainted ground-truth box."""


class EmptyEvaluationError(CamoError, ValueError):
    """A report was requested over zero scored images."""


class OracleUnavailableError(CamoError):
    """The closed-form optimum is only defined for noiseless scene specs."""


class TransportError(CamoError):
    """The bridge endpoint could not be reached (after retries)."""


class ServiceError(CamoError):
    """The bridge endpoint answered with a non-200 status."""


class ProtocolError(CamoError):
    """A bridge message violated the cca-bridge/1 schema."""


class BridgeVersionError(ProtocolError):
    """The service speaks a different protocol version."""
