"""Exception hierarchy shared across the toolkit."""


class MedimgError(Exception):
    """Base class for all toolkit errors."""


class InvalidGeometryError(MedimgError, ValueError):
    """Image geometry (size, spacing, orientation) is inconsistent."""


class InvalidArgumentError(MedimgError, ValueError):
    """An argument is outside the documented domain."""


class IndexOutOfRangeError(MedimgError, IndexError):
    """A 1-based voxel index lies outside the image extent."""


class ShapeError(MedimgError, ValueError):
    """An array argument has an incompatible shape."""


class EmptyBoundsError(MedimgError):
    """No voxel satisfies the bounds/threshold query."""


class EmptyCropError(MedimgError):
    """Crop bounds do not intersect the image extent."""


class GeometryMismatchError(MedimgError, ValueError):
    """Two images expected on the same grid have different geometry."""


class DegenerateMetricError(MedimgError):
    """A similarity metric is undefined for the given images."""


class NotRigidError(MedimgError, ValueError):
    """A matrix expected to be rigid has a non-orthonormal rotation block."""


class DegenerateGridError(MedimgError, ValueError):
    """An FFD control grid cannot cover the requested bounds."""


class InvalidStartError(MedimgError, ValueError):
    """Objective is non-finite at the optimizer start point."""


class NoConsensusError(MedimgError):
    """RANSAC found no model with enough inliers."""


class FileFormatError(MedimgError):
    """Base class for file codec errors."""


class ParseError(FileFormatError):
    """A header or record could not be parsed."""


class TruncatedDataError(FileFormatError):
    """File payload is shorter than the header promises."""


class UnsupportedTypeError(FileFormatError):
    """Pixel type or cell type not supported by the codec."""


class UnsupportedCellError(FileFormatError):
    """Mesh file contains a non-triangle cell."""


class DecodeError(FileFormatError):
    """A picture file could not be decoded."""
