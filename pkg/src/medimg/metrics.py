"""Similarity metrics for intensity-based registration (SSD, NCC, NMI).

All metrics return costs to be minimized, evaluated over the fixed image
grid. Out-of-support moving voxels take the moving image's padding value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateMetricError, GeometryMismatchError
from .image import Image


@dataclass
class MetricContext:
    fixed: Image
    moving: Image
    transform_fn: Callable  # (moving, params) -> Image on the fixed grid
    bins: int = 64          # NMI joint histogram bins

    def transformed(self, params):
        out = self.transform_fn(self.moving, params)
        if not np.array_equal(out.size, self.fixed.size):
            raise GeometryMismatchError(
                "transform output grid does not match the fixed image")
        return out


def ssd_cost(ctx, params):
    """Mean squared intensity difference over the fixed grid."""
    moved = ctx.transformed(params)
    diff = ctx.fixed.data - moved.data
    return float(np.mean(diff * diff))


def ncc_cost(ctx, params):
    """1 - normalized cross-correlation; 0 at perfect positive correlation."""
    moved = ctx.transformed(params)
    f = ctx.fixed.data.ravel()
    m = moved.data.ravel()
    fc = f - f.mean()
    mc = m - m.mean()
    denom = np.sqrt((fc @ fc) * (mc @ mc))
    if denom == 0:
        raise DegenerateMetricError("NCC undefined: an image has zero variance")
    return float(1.0 - (fc @ mc) / denom)


def _entropy(p):
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def nmi_cost(ctx, params):
    """2 - NMI with NMI = (Hf + Hm) / Hfm; 0 when the joint is diagonal."""
    if ctx.bins < 2:
        raise DegenerateMetricError("NMI needs at least 2 bins")
    moved = ctx.transformed(params)
    f = ctx.fixed.data.ravel()
    m = moved.data.ravel()
    if f.max() == f.min() or m.max() == m.min():
        raise DegenerateMetricError("NMI undefined for a constant image")
    joint, _, _ = np.histogram2d(f, m, bins=ctx.bins,
                                 range=[[f.min(), f.max()], [m.min(), m.max()]])
    p = joint / joint.sum()
    hf = _entropy(p.sum(axis=1))
    hm = _entropy(p.sum(axis=0))
    hfm = _entropy(p.ravel())
    if hfm == 0:
        raise DegenerateMetricError("NMI undefined: degenerate joint histogram")
    return float(2.0 - (hf + hm) / hfm)


METRICS = {"ssd": ssd_cost, "ncc": ncc_cost, "nmi": nmi_cost}
