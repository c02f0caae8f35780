"""Exception types raised across the toolkit.

Every error the pipeline can raise deliberately derives from ToolError so
the CLI can map failures to a single-line diagnostic and exit code 1.
"""


class ToolError(Exception):
    """Base class for all toolkit errors."""


# image codec / geometry
class MalformedImage(ToolError):
    """Byte payload could not be decoded as an image."""


class UnsupportedFormat(ToolError):
    """Image format (or pixel depth) outside the supported set."""


class ZeroDimension(ToolError):
    """Requested image dimension is not strictly positive."""


# enhancement stages
class EvenKernel(ToolError):
    """Median kernel size must be odd."""


class EvenStructuringElement(ToolError):
    """Structuring element side must be odd."""


class TileGridTooFine(ToolError):
    """More tiles requested than pixels available along an axis."""


# quality metrics
class DimensionMismatch(ToolError):
    """Reference and test images differ in shape."""


class ImageTooSmall(ToolError):
    """Image smaller than the metric's window."""


# dataset handling
class NoClassesFound(ToolError):
    """Dataset root contains no class subdirectories."""


class BadRatios(ToolError):
    """Split ratios invalid (non-positive or not summing to 1)."""


class EmptyManifest(ToolError):
    """Manifest holds no samples."""


class IoFailure(ToolError):
    """Filesystem operation failed while materializing a split."""


# classification metrics
class UnknownLabel(ToolError):
    """Record refers to a label outside the declared class list."""


class EmptyInput(ToolError):
    """Operation requires at least one record."""


class IndexOutOfRange(ToolError):
    """Class index outside the confusion matrix."""


class EmptyMatrix(ToolError):
    """Confusion matrix has no observations."""


# report inputs
class SchemaViolation(ToolError):
    """A JSONL line does not match the expected schema."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


class NonMonotoneEpochs(ToolError):
    """Epoch numbers for a model are not strictly increasing."""


class DuplicateModel(ToolError):
    """Two run summaries share a model name."""
