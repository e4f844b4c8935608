"""GIPL (Guys Image Processing Lab) reader and writer.

Fixed 256-byte big-endian header: ushort dims[4], ushort image type code,
float pixdim[4], 80-byte patient line, float matrix[20], two flag bytes,
double min/max, double origin[4], 4 float user fields, and the magic number.
Layout locked by byte-level fixtures in the test suite.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import ParseError, TruncatedDataError, UnsupportedTypeError
from ..image import Image
from .pixeltypes import dtype_for

GIPL_MAGIC = 0xEFFFE9B0

# GIPL type code -> pixel tag
GIPL_TYPES = {
    7: "int8",
    8: "uint8",
    15: "int16",
    16: "uint16",
    31: "uint32",
    32: "int32",
    64: "float32",
    65: "float64",
}
TAG_TO_GIPL = {v: k for k, v in GIPL_TYPES.items()}

_HEADER = struct.Struct(">4H H 4f 80s 20f 2B 2d 4d 4f I")
assert _HEADER.size == 256


def read_gipl(path):
    with open(path, "rb") as fh:
        header = fh.read(256)
        if len(header) < 256:
            raise ParseError("GIPL header truncated")
        fields = _HEADER.unpack(header)
        dims = fields[0:4]
        type_code = fields[4]
        pixdim = fields[5:9]
        origin4 = fields[34:38]
        magic = fields[42]
        if magic != GIPL_MAGIC:
            raise ParseError("bad GIPL magic number; not a GIPL file")
        if type_code not in GIPL_TYPES:
            raise UnsupportedTypeError(f"unsupported GIPL type code {type_code}")
        ndim = 4 if dims[3] > 1 else (3 if dims[2] > 1 else 2)
        size = np.array(dims[:ndim], dtype=int)
        dt = dtype_for(GIPL_TYPES[type_code]).newbyteorder(">")
        expected = int(np.prod(size))
        payload = np.frombuffer(fh.read(expected * dt.itemsize), dtype=dt)
        if payload.size < expected:
            raise TruncatedDataError("GIPL payload shorter than header promises")
        data = payload.astype(np.float64).reshape(tuple(size), order="F")
        return Image(data, np.array(origin4[:ndim]), np.array(pixdim[:ndim]),
                     np.eye(ndim))


def write_gipl(path, image, element_type="float64"):
    code = TAG_TO_GIPL.get(element_type)
    if code is None:
        raise UnsupportedTypeError(f"unsupported element type {element_type!r}")
    dims = [1, 1, 1, 1]
    pixdim = [1.0, 1.0, 1.0, 1.0]
    origin = [0.0, 0.0, 0.0, 0.0]
    for k in range(image.ndim):
        dims[k] = int(image.size[k])
        pixdim[k] = float(image.spacing[k])
        origin[k] = float(image.origin[k])
    from .pixeltypes import cast_from_float64
    cast = cast_from_float64(image.data, element_type)
    header = _HEADER.pack(
        *dims, code, *pixdim, b"\0" * 80, *([0.0] * 20), 0, 0,
        float(cast.min()) if cast.size else 0.0,
        float(cast.max()) if cast.size else 0.0,
        *origin, 0.0, 1.0, 0.0, 0.0, GIPL_MAGIC)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(cast.astype(cast.dtype.newbyteorder(">")).ravel(order="F").tobytes())
