"""Exception hierarchy.

Every error carries a stable ``code`` string so batch drivers and the CLI can
emit machine-readable diagnostics (``ERR:<code>:<message>``) without matching
on prose.
"""


class ToolkitError(Exception):
    """Base class for all prnuscope errors."""

    code = "error"


class UnreadableFileError(ToolkitError):
    code = "unreadable"


class MalformedHeaderError(ToolkitError):
    code = "malformed-header"


class TruncatedPayloadError(ToolkitError):
    code = "truncated"


class UnsupportedFormatError(ToolkitError):
    code = "unsupported-format"


class UnwritablePathError(ToolkitError):
    code = "unwritable"


class VocabularyError(ToolkitError):
    code = "bad-vocabulary"


class DuplicatePathError(ToolkitError):
    code = "duplicate-path"


class DimensionError(ToolkitError):
    code = "dims-mismatch"


class DegenerateInputError(ToolkitError):
    code = "degenerate-input"


class PlaneTooSmallError(ToolkitError):
    code = "plane-too-small"


class BadArgumentError(ToolkitError):
    code = "bad-argument"


class EmptyAccumulatorError(ToolkitError):
    code = "empty-accumulator"


class InsufficientSupportError(ToolkitError):
    code = "insufficient-support"


class RectOutOfBoundsError(ToolkitError):
    code = "rect-out-of-bounds"


class RectOverlapError(ToolkitError):
    code = "rect-overlap"


class JpegNoSoiError(ToolkitError):
    code = "jpeg-no-soi"


class JpegOverrunError(ToolkitError):
    code = "jpeg-overrun"


class JpegReservedMarkerError(ToolkitError):
    code = "jpeg-reserved-marker"


class JpegTruncatedError(ToolkitError):
    code = "jpeg-truncated"


class ExifMalformedError(ToolkitError):
    code = "exif-malformed"
