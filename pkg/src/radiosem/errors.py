"""Exception hierarchy shared by every radiosem module."""


class RadiosemError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(RadiosemError, ValueError):
    pass


class KindMismatch(RadiosemError, ValueError):
    pass


class ZeroReference(RadiosemError, ValueError):
    pass


class DegenerateField(RadiosemError, ValueError):
    pass


class NonPositiveDistance(RadiosemError, ValueError):
    pass


class TooFewSamples(RadiosemError, ValueError):
    pass


class DegenerateGeometry(RadiosemError, ValueError):
    pass


class IndivisibleDims(RadiosemError, ValueError):
    pass


class TooFewDistinctLatents(RadiosemError, ValueError):
    pass


class IndexOutOfRange(RadiosemError, ValueError):
    pass


class CorruptStream(RadiosemError, ValueError):
    pass


# wire format
class TooManyBs(RadiosemError, ValueError):
    pass


class BlobTooLarge(RadiosemError, ValueError):
    pass


class BadMagic(RadiosemError, ValueError):
    pass


class UnsupportedVersion(RadiosemError, ValueError):
    pass


class Truncated(RadiosemError, ValueError):
    pass


class LengthMismatch(RadiosemError, ValueError):
    pass


# learning
class ShapeMismatch(RadiosemError, ValueError):
    pass


class NumericOverflow(RadiosemError, ArithmeticError):
    pass


class EmptyDataset(RadiosemError, ValueError):
    pass


class KTooLarge(RadiosemError, ValueError):
    pass


class LayoutMismatch(RadiosemError, ValueError):
    pass


class EmptyUpdateSet(RadiosemError, ValueError):
    pass


# harness
class PlacementFailure(RadiosemError, RuntimeError):
    pass


class MalformedFile(RadiosemError, ValueError):
    pass


class MissingFile(RadiosemError, FileNotFoundError):
    pass


class InconsistentDims(RadiosemError, ValueError):
    pass


class PipelineError(RadiosemError, RuntimeError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the original error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline stage '{stage}' failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
