"""Everyday picture formats (PNG/JPEG/TIFF/...) as 2D images.

Color inputs are converted to luminance with ITU-R 601 weights. The result
has unit spacing, zero origin, and identity orientation.
"""

from __future__ import annotations

import numpy as np
from PIL import Image as PilImage, UnidentifiedImageError

from ..errors import DecodeError
from ..image import Image

LUMA_WEIGHTS = (0.299, 0.587, 0.114)  # ITU-R 601


def read_picture(path):
    try:
        with PilImage.open(path) as pil:
            arr = np.asarray(pil.convert("RGB") if pil.mode not in ("L", "I", "F", "I;16")
                             else pil, dtype=np.float64)
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"could not decode picture {path!r}: {exc}") from exc
    if arr.ndim == 3:
        arr = arr @ np.asarray(LUMA_WEIGHTS)
    # PIL gives (rows, cols); our first (fastest) dimension is x = column
    data = arr.T
    return Image(data, np.zeros(2), np.ones(2), np.eye(2))
