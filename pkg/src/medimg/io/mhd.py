"""MetaImage (*.mhd + *.raw) reader and writer.

Header is "Key = value" text; raw payload is first-dimension-fastest,
little-endian unless ElementByteOrderMSB = True. Compression is unsupported
both ways so the payload stays bit-exact.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ParseError, TruncatedDataError, UnsupportedTypeError
from ..image import Image
from .pixeltypes import cast_from_float64, dtype_for

MET_TYPES = {
    "MET_UCHAR": "uint8",
    "MET_CHAR": "int8",
    "MET_USHORT": "uint16",
    "MET_SHORT": "int16",
    "MET_UINT": "uint32",
    "MET_INT": "int32",
    "MET_FLOAT": "float32",
    "MET_DOUBLE": "float64",
}
TAG_TO_MET = {v: k for k, v in MET_TYPES.items()}


def _parse_header(path):
    header = {}
    with open(path, "rb") as fh:
        for raw_line in fh:
            line = raw_line.decode("latin-1").strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"malformed header line: {line!r}")
            key, value = line.split("=", 1)
            header[key.strip()] = value.strip()
            if key.strip() == "ElementDataFile":
                break
    return header


def _require(header, key):
    if key not in header:
        raise ParseError(f"missing mandatory MetaImage key {key!r}")
    return header[key]


def read_mhd(path):
    header = _parse_header(path)
    ndims = int(_require(header, "NDims"))
    size = np.array([int(v) for v in _require(header, "DimSize").split()])
    if size.size != ndims:
        raise ParseError("DimSize does not match NDims")
    spacing = np.array([float(v) for v in header.get(
        "ElementSpacing", " ".join(["1"] * ndims)).split()])
    origin = None
    for key in ("Offset", "Origin", "Position"):
        if key in header:
            origin = np.array([float(v) for v in header[key].split()])
            break
    if origin is None:
        origin = np.zeros(ndims)
    orientation = np.eye(ndims)
    for key in ("TransformMatrix", "Orientation"):
        if key in header:
            vals = [float(v) for v in header[key].split()]
            if len(vals) != ndims * ndims:
                raise ParseError(f"{key} must hold {ndims * ndims} values")
            # row-major in the file
            orientation = np.array(vals).reshape(ndims, ndims)
            break
    met = _require(header, "ElementType")
    if met not in MET_TYPES:
        raise UnsupportedTypeError(f"unknown ElementType {met!r}")
    dt = dtype_for(MET_TYPES[met])
    msb = header.get("ElementByteOrderMSB", "False").lower() == "true"
    dt = dt.newbyteorder(">" if msb else "<")
    if header.get("CompressedData", "False").lower() == "true":
        raise UnsupportedTypeError("compressed MetaImage data is not supported")

    datafile = _require(header, "ElementDataFile")
    if datafile == "LOCAL":
        raise UnsupportedTypeError("LOCAL ElementDataFile is not supported")
    raw_path = os.path.join(os.path.dirname(os.path.abspath(path)), datafile)
    payload = np.fromfile(raw_path, dtype=dt)
    expected = int(np.prod(size))
    if payload.size < expected:
        raise TruncatedDataError(
            f"raw payload holds {payload.size} voxels, header promises {expected}")
    data = payload[:expected].astype(np.float64).reshape(tuple(size), order="F")
    return Image(data, origin, spacing, orientation)


def write_mhd(path, image, element_type="float64"):
    met = TAG_TO_MET.get(element_type)
    if met is None:
        raise UnsupportedTypeError(f"unsupported element type {element_type!r}")
    base = os.path.splitext(os.path.basename(path))[0]
    raw_name = base + ".raw"
    n = image.ndim
    lines = [
        "ObjectType = Image",
        f"NDims = {n}",
        "BinaryData = True",
        "BinaryDataByteOrderMSB = False",
        "ElementByteOrderMSB = False",
        "CompressedData = False",
        "TransformMatrix = " + " ".join(repr(float(v)) for v in image.orientation.ravel()),
        "Offset = " + " ".join(repr(float(v)) for v in image.origin),
        "ElementSpacing = " + " ".join(repr(float(v)) for v in image.spacing),
        "DimSize = " + " ".join(str(int(v)) for v in image.size),
        f"ElementType = {met}",
        f"ElementDataFile = {raw_name}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    cast = cast_from_float64(image.data, element_type)
    raw_path = os.path.join(os.path.dirname(os.path.abspath(path)), raw_name)
    cast.astype(cast.dtype.newbyteorder("<")).ravel(order="F").tofile(raw_path)
