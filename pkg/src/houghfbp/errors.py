"""Exception hierarchy shared by every module of the package."""


class TomoError(Exception):
    """Base class for all errors raised by :mod:`houghfbp`."""

    kind = "error"


class DimensionError(TomoError, ValueError):
    kind = "dimension"


class ParameterError(TomoError, ValueError):
    kind = "parameter"


class GeometryError(TomoError, ValueError):
    kind = "geometry"


class PlanError(TomoError, ValueError):
    """Raised when a Fast Hough Transform plan cannot be built (size not 2**k)."""

    kind = "plan"


class FittingError(TomoError, RuntimeError):
    kind = "fitting"


class ConfigError(TomoError, ValueError):
    kind = "config"


class ParseError(TomoError, ValueError):
    """Malformed file contents.

    ``offset`` is the byte offset at which parsing failed.
    """

    kind = "parse"

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset
