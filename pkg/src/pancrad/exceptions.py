"""Exception hierarchy shared by every pipeline stage."""


class PancradError(ValueError):
    """Base class for all data and contract errors raised by pancrad."""


class FormatError(PancradError):
    """A file does not follow the expected layout.

    ``field`` names the offending header field or column when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class UnsupportedDatatypeError(FormatError):
    pass


class DimensionalityError(FormatError):
    pass


class AlignmentError(PancradError):
    pass


class UnsupportedOrientationError(PancradError):
    pass


class EmptyMaskError(PancradError):
    pass


class RangeError(PancradError, IndexError):
    pass


class DegenerateRoiError(PancradError):
    pass


class FeatureComputationError(PancradError, ArithmeticError):
    pass


class SchemaError(PancradError):
    pass


class DuplicateCaseError(SchemaError):
    pass


class VersionError(SchemaError):
    pass


class DegenerateLabelsError(PancradError):
    pass


class StratificationError(PancradError):
    pass


class ConfigError(PancradError):
    pass
