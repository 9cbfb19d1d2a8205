"""Exception hierarchy.

``ValidationError`` covers bad inputs and maps to CLI exit code 1;
``StageError`` covers external stage failures and maps to exit code 2.
"""


class SrxError(Exception):
    """Base class for all harness errors."""


class ValidationError(SrxError, ValueError):
    pass


class StageError(SrxError):
    pass


# imaging
class UnsupportedFormat(ValidationError):
    pass


class OddWidth(ValidationError):
    pass


# metrics
class ShapeMismatch(ValidationError):
    pass


class TooSmall(ValidationError):
    pass


class DegenerateInput(ValidationError):
    """Zero-variance input where a normalized score is undefined."""


# fid
class TooFewSamples(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class IndefiniteMatrix(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadMagic(ValidationError):
    pass


class TruncatedFile(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


# dataset
class BadPairDimensions(ValidationError):
    pass


class EmptySource(ValidationError):
    pass


class ManifestParseError(ValidationError):
    pass


class ManifestInvalid(ValidationError):
    pass


# pipeline
class PhaseUnavailable(ValidationError):
    pass


class StageCrashed(StageError):
    pass


class MissingOutput(StageError):
    pass


class WrongOutputScale(StageError):
    pass


# report
class EmptySeries(ValidationError):
    pass


class MissingReport(ValidationError):
    pass
