"""NIfTI-1 reader (single-file, uncompressed). Writing is not supported."""

from __future__ import annotations

import struct

import numpy as np

from ..errors import ParseError, TruncatedDataError, UnsupportedTypeError
from ..image import Image

NIFTI_DTYPES = {
    2: np.uint8,
    4: np.int16,
    8: np.int32,
    16: np.float32,
    64: np.float64,
    256: np.int8,
    512: np.uint16,
    768: np.uint32,
}


def _quaternion_rotation(b, c, d, qfac):
    a2 = 1.0 - (b * b + c * c + d * d)
    a = np.sqrt(max(a2, 0.0))
    r = np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - b * b - c * c],
    ])
    r[:, 2] *= qfac
    return r


def _polish_rotation(m):
    u, _, vt = np.linalg.svd(m)
    return u @ vt


def read_nifti(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
        if head == b"\x1f\x8b":
            raise UnsupportedTypeError("compressed NIfTI files are not supported")
        raw = head + fh.read(346)
        if len(raw) < 348:
            raise TruncatedDataError("NIfTI header truncated")
        endian = "<"
        (sizeof_hdr,) = struct.unpack_from("<i", raw, 0)
        if sizeof_hdr != 348:
            endian = ">"
            (sizeof_hdr,) = struct.unpack_from(">i", raw, 0)
            if sizeof_hdr != 348:
                raise ParseError("not a NIfTI-1 header (sizeof_hdr != 348)")
        magic = raw[344:348]
        if magic[:3] != b"n+1":
            raise ParseError(f"wrong NIfTI magic {magic!r}; not a single-file NIfTI-1")

        dim = struct.unpack_from(endian + "8h", raw, 40)
        (datatype,) = struct.unpack_from(endian + "h", raw, 70)
        pixdim = struct.unpack_from(endian + "8f", raw, 76)
        (vox_offset,) = struct.unpack_from(endian + "f", raw, 108)
        scl_slope, scl_inter = struct.unpack_from(endian + "2f", raw, 112)
        qform_code, sform_code = struct.unpack_from(endian + "2h", raw, 252)
        quatern = struct.unpack_from(endian + "3f", raw, 256)
        qoffset = struct.unpack_from(endian + "3f", raw, 268)
        srow = np.array(struct.unpack_from(endian + "12f", raw, 280)).reshape(3, 4)

        ndim = dim[0]
        if not 2 <= ndim <= 4:
            raise UnsupportedTypeError(f"unsupported NIfTI dimensionality {ndim}")
        size = np.array(dim[1:1 + ndim], dtype=int)
        if datatype not in NIFTI_DTYPES:
            raise UnsupportedTypeError(f"unsupported NIfTI datatype code {datatype}")
        dt = np.dtype(NIFTI_DTYPES[datatype]).newbyteorder(endian)

        fh.seek(int(vox_offset))
        expected = int(np.prod(size))
        payload = np.frombuffer(fh.read(expected * dt.itemsize), dtype=dt)
        if payload.size < expected:
            raise TruncatedDataError("NIfTI payload shorter than header promises")
        data = payload.astype(np.float64).reshape(tuple(size), order="F")
        if scl_slope != 0.0:
            data = data * scl_slope + scl_inter

    spacing = np.abs(np.array(pixdim[1:1 + ndim], dtype=float))
    spacing[spacing == 0] = 1.0
    origin = np.zeros(ndim)
    orientation = np.eye(ndim)
    k = min(3, ndim)  # spatial dims covered by the affine
    if sform_code > 0:
        a = srow[:, :3]
        sp3 = np.linalg.norm(a, axis=0)
        sp3[sp3 == 0] = 1.0
        r = _polish_rotation(a / sp3)
        spacing[:k] = sp3[:k]
        orientation[:k, :k] = _polish_rotation(r[:k, :k])
        origin[:k] = srow[:k, 3]
    elif qform_code > 0:
        qfac = -1.0 if pixdim[0] == -1.0 else 1.0
        r = _quaternion_rotation(*quatern, qfac)
        orientation[:k, :k] = _polish_rotation(r[:k, :k])
        origin[:k] = qoffset[:k]
    return Image(data, origin, spacing, orientation)
