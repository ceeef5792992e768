"""Exception hierarchy shared across the package."""


class Loop2MeshError(Exception):
    """Base class for every package-specific failure."""


class InvalidGeometryError(Loop2MeshError):
    """Polygon or contour input violates a geometric precondition."""


class DegenerateDataError(Loop2MeshError):
    """Data lacks the spread needed by the requested operation."""


class FrameMismatchError(Loop2MeshError):
    """Operation applied to points living in the wrong coordinate frame."""


class ShapeMismatchError(Loop2MeshError):
    """Array shapes are inconsistent with the declared dimensions."""


class InvalidInputError(Loop2MeshError):
    """Operand violates a precondition (empty set, bad epsilon, bad range, ...)."""


class ParseError(Loop2MeshError):
    """Input file does not conform to its documented grammar."""


class EmptyDatasetError(Loop2MeshError):
    """No usable training pairs were supplied."""


class TrainingDivergedError(Loop2MeshError):
    """Training loss became non-finite; carries the offending epoch."""

    def __init__(self, epoch: int, message: str):
        super().__init__(message)
        self.epoch = epoch


class WindowMismatchError(Loop2MeshError):
    """Density grids being compared were built over different windows."""


class DegenerateDensityError(Loop2MeshError):
    """Kernel mass inside the evaluation window is numerically zero."""


class ConfigError(Loop2MeshError):
    """Invalid run configuration."""
