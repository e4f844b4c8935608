"""Pixel type tags and the cast rule from internal float64 storage."""

from __future__ import annotations

import numpy as np

from ..errors import UnsupportedTypeError

# tag -> numpy dtype (byte width implied)
PIXEL_TYPES = {
    "uint8": np.uint8,
    "int8": np.int8,
    "uint16": np.uint16,
    "int16": np.int16,
    "uint32": np.uint32,
    "int32": np.int32,
    "float32": np.float32,
    "float64": np.float64,
}


def dtype_for(tag: str) -> np.dtype:
    try:
        return np.dtype(PIXEL_TYPES[tag])
    except KeyError:
        raise UnsupportedTypeError(f"unsupported pixel type {tag!r}") from None


def cast_from_float64(data: np.ndarray, tag: str) -> np.ndarray:
    """Cast float64 data to a tag: round half away from zero, clamp to range."""
    dt = dtype_for(tag)
    if dt.kind == "f":
        return data.astype(dt)
    info = np.iinfo(dt)
    rounded = np.sign(data) * np.floor(np.abs(data) + 0.5)
    return np.clip(rounded, info.min, info.max).astype(dt)
