"""Exception types shared across the workbench.

Every error raised by the core modules derives from WorkbenchError and
carries a machine-readable ``code`` that the HTTP layer maps 1:1 onto
API error responses.
"""


class WorkbenchError(Exception):
    code = "error"


class ShapeMismatchError(WorkbenchError):
    """Tensor shapes incompatible with the declared network layout."""

    code = "shape_mismatch"


class ParameterError(WorkbenchError):
    """A caller-supplied parameter is out of its legal range."""

    code = "invalid_parameter"


class UnknownLayerError(WorkbenchError):
    code = "unknown_layer"


class TargetRangeError(WorkbenchError):
    code = "target_out_of_range"


class PlacementError(WorkbenchError):
    """Mouse/cheese placement onto an illegal cell."""

    code = "invalid_placement"


class FormatError(WorkbenchError):
    """A persisted artifact does not parse (bad magic, bad version, ...)."""

    code = "format_error"


class TruncatedFileError(WorkbenchError, OSError):
    """File ended before the declared payload; an I/O-level failure."""

    code = "truncated_file"


class NotFoundError(WorkbenchError):
    code = "not_found"


class ConflictError(WorkbenchError):
    """Stale write or competing writer on a session object."""

    code = "conflict"
