"""Exception types shared across the package.

The CLI maps each class to a distinct exit code, so keep the hierarchy
flat and the meanings disjoint.
"""


class MirrorSymError(Exception):
    """Base class for all package errors."""


class ParameterError(MirrorSymError, ValueError):
    """A parameter or input record violates a documented precondition."""


class RecordFormatError(ParameterError):
    """A detection/groundtruth/size file line could not be parsed."""

    def __init__(self, path, line_number, message):
        self.path = str(path)
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class NoFeaturesError(MirrorSymError, RuntimeError):
    """No non-homogeneous cells were found, so no feature points exist."""


class NoSymmetryEvidenceError(MirrorSymError, RuntimeError):
    """All pair weights are zero; the vote accumulator would be empty."""
