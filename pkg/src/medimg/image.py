"""N-dimensional geometric image container.

Voxel indices are 1-based: index (1, ..., 1) maps to ``origin``. Intensities
are always stored as float64; casting to narrower pixel types happens only in
the file codecs. Data layout is "first dimension fastest", i.e. linear indices
follow Fortran ravel order over ``data``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    InvalidArgumentError,
    InvalidGeometryError,
    ShapeError,
    EmptyBoundsError,
)

_ORTHO_TOL = 1e-9

INTERPOLATION_MODES = ("nearest", "linear")


def _as_vector(v, n=None, dtype=float):
    a = np.atleast_1d(np.asarray(v, dtype=dtype)).ravel()
    if n is not None and a.size != n:
        raise ShapeError(f"expected a vector of length {n}, got {a.size}")
    return a


def _check_orthonormal(m, tol=_ORTHO_TOL):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidGeometryError("orientation must be a square matrix")
    if not np.allclose(m.T @ m, np.eye(m.shape[0]), atol=tol):
        raise InvalidGeometryError("orientation columns are not orthonormal")
    if abs(abs(np.linalg.det(m)) - 1.0) > tol:
        raise InvalidGeometryError("orientation determinant is not +-1")
    return m


def round_half_away(x):
    """Round to nearest integer, halves away from zero (NN interpolation rule)."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


@dataclass
class Image:
    data: np.ndarray
    origin: np.ndarray
    spacing: np.ndarray
    orientation: np.ndarray
    index: np.ndarray = None
    padding_value: float = 0.0
    max_chunk_size: int = 10_000_000

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        n = self.data.ndim
        self.origin = _as_vector(self.origin, n)
        self.spacing = _as_vector(self.spacing, n)
        self.orientation = _check_orthonormal(self.orientation)
        if self.orientation.shape[0] != n:
            raise InvalidGeometryError("orientation size does not match dimension")
        if self.index is None:
            self.index = np.ones(n, dtype=int)
        else:
            self.index = _as_vector(self.index, n, dtype=int)
        if np.any(self.spacing <= 0):
            raise InvalidGeometryError("spacing components must be positive")
        if np.any(np.asarray(self.data.shape) < 1):
            raise InvalidGeometryError("size components must be >= 1")
        if self.max_chunk_size < 1:
            raise InvalidGeometryError("max_chunk_size must be positive")

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, size, origin=None, spacing=None, orientation=None, **kw):
        """New zero-filled image from geometry."""
        size = _as_vector(size, dtype=int)
        if np.any(size < 1):
            raise InvalidGeometryError("size components must be positive")
        n = size.size
        if origin is None:
            origin = np.zeros(n)
        if spacing is None:
            spacing = np.ones(n)
        if orientation is None:
            orientation = np.eye(n)
        data = np.zeros(tuple(size), dtype=np.float64)
        return cls(data, origin, spacing, orientation, **kw)

    @classmethod
    def like(cls, template: "Image", data=None):
        """New image copying all geometry members of ``template``.

        Data is zero-filled unless given.
        """
        if data is None:
            data = np.zeros(template.data.shape, dtype=np.float64)
        return cls(
            np.asarray(data, dtype=np.float64),
            template.origin.copy(),
            template.spacing.copy(),
            template.orientation.copy(),
            index=template.index.copy(),
            padding_value=template.padding_value,
            max_chunk_size=template.max_chunk_size,
        )

    def copy(self):
        return Image.like(self, data=self.data.copy())

    # -- basic properties -------------------------------------------------

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return np.asarray(self.data.shape, dtype=int)

    @property
    def num_voxels(self):
        return int(self.data.size)

    def get_strides(self):
        """Strides (in voxels) used for linear indexing; first dim fastest."""
        return np.concatenate(([1], np.cumprod(self.size[:-1]))).astype(int)

    # -- index/world algebra ----------------------------------------------

    def index_to_world(self, indices=None):
        """World positions of (continuous) indices.

        ``indices`` is N x m (or a length-N vector). A 1 x m row for an N-D
        image with N > 1 is interpreted as linear indices. With no argument,
        returns positions of every voxel in storage order.
        """
        if indices is None:
            indices = np.stack(
                [g.ravel(order="F") for g in np.meshgrid(
                    *[np.arange(1, s + 1) for s in self.size], indexing="ij")]
            )
        idx = np.asarray(indices, dtype=float)
        squeeze = idx.ndim == 1 and idx.size == self.ndim
        if idx.ndim == 1 and not squeeze:
            idx = idx[None, :]
        if squeeze:
            idx = idx[:, None]
        if idx.shape[0] == 1 and self.ndim > 1:
            # a 1 x m row holds linear indices
            idx = self.nd_index(idx.ravel().astype(int)).astype(float)
            squeeze = False
        if idx.shape[0] != self.ndim:
            raise ShapeError(
                f"indices must be {self.ndim} x m, got {idx.shape}")
        pos = self.origin[:, None] + self.orientation @ (
            self.spacing[:, None] * (idx - 1.0))
        return pos[:, 0] if squeeze else pos

    def world_to_continuous_index(self, positions):
        """Continuous indices of world positions; exact inverse of index_to_world."""
        pos = np.asarray(positions, dtype=float)
        squeeze = pos.ndim == 1
        if squeeze:
            pos = pos[:, None]
        if pos.shape[0] != self.ndim:
            raise ShapeError(f"positions must be {self.ndim} x m, got {pos.shape}")
        idx = (self.orientation.T @ (pos - self.origin[:, None])) \
            / self.spacing[:, None] + 1.0
        return idx[:, 0] if squeeze else idx

    # -- pixel access -----------------------------------------------------

    def _check_index(self, idx):
        idx = _as_vector(idx, self.ndim, dtype=int)
        if np.any(idx < 1) or np.any(idx > self.size):
            raise IndexOutOfRangeError(f"index {tuple(idx)} outside 1..{tuple(self.size)}")
        return idx

    def get_pixel(self, idx):
        idx = self._check_index(idx)
        return float(self.data[tuple(idx - 1)])

    def set_pixel(self, idx, value):
        idx = self._check_index(idx)
        self.data[tuple(idx - 1)] = value

    def is_out_of_range(self, idx):
        idx = _as_vector(idx, self.ndim)
        return bool(np.any(idx < 1) or np.any(idx > self.size))

    def linear_index(self, ndidx):
        """1-based linear index of a 1-based N-D index (first dim fastest)."""
        nd = np.asarray(ndidx, dtype=int)
        single = nd.ndim == 1
        nd = nd[:, None] if single else nd
        if np.any(nd < 1) or np.any(nd > self.size[:, None]):
            raise IndexOutOfRangeError("N-D index out of range")
        lin = 1 + (self.get_strides()[:, None] * (nd - 1)).sum(axis=0)
        return int(lin[0]) if single else lin

    def nd_index(self, lin):
        """1-based N-D index of a 1-based linear index."""
        lin = np.asarray(lin, dtype=int)
        single = lin.ndim == 0
        lin = np.atleast_1d(lin)
        if np.any(lin < 1) or np.any(lin > self.num_voxels):
            raise IndexOutOfRangeError("linear index out of range")
        rem = lin - 1
        out = np.empty((self.ndim, lin.size), dtype=int)
        for k, s in enumerate(self.size):
            out[k] = rem % s + 1
            rem //= s
        return out[:, 0] if single else out

    # -- interpolation ----------------------------------------------------

    def get_value(self, positions, mode="nearest"):
        """Interpolated intensities at world positions (N x m).

        Positions whose continuous index falls outside [1, size] in any
        component return ``padding_value``.
        """
        if mode not in INTERPOLATION_MODES:
            raise InvalidArgumentError(f"unsupported interpolation mode {mode!r}")
        pos = np.asarray(positions, dtype=float)
        squeeze = pos.ndim == 1
        if squeeze:
            pos = pos[:, None]
        cidx = self.world_to_continuous_index(pos)
        vals = self._interpolate(cidx, mode)
        return float(vals[0]) if squeeze else vals

    def _interpolate(self, cidx, mode):
        size = self.size[:, None]
        inside = np.all((cidx >= 1.0) & (cidx <= size), axis=0)
        out = np.full(cidx.shape[1], float(self.padding_value))
        if not np.any(inside):
            return out
        ci = cidx[:, inside]
        if mode == "nearest":
            nn = round_half_away(ci).astype(int)
            np.clip(nn, 1, size, out=nn)
            out[inside] = self.data[tuple(nn - 1)]
            return out
        # multilinear over the 2^N surrounding voxels
        lo = np.floor(ci).astype(int)
        np.clip(lo, 1, np.maximum(size - 1, 1), out=lo)
        frac = ci - lo
        acc = np.zeros(ci.shape[1])
        n = self.ndim
        for corner in range(1 << n):
            w = np.ones(ci.shape[1])
            idx = np.empty_like(lo)
            for k in range(n):
                if corner >> k & 1:
                    idx[k] = lo[k] + 1
                    w *= frac[k]
                else:
                    idx[k] = lo[k]
                    w *= 1.0 - frac[k]
            np.clip(idx, 1, size, out=idx)  # singleton dims: weight is 0 there
            acc += w * self.data[tuple(idx - 1)]
        out[inside] = acc
        return out

    # -- geometry helpers -------------------------------------------------

    def geometric_centre(self):
        return self.index_to_world((self.size + 1) / 2.0)

    def set_origin_to_centre(self):
        """Translate the origin so the geometric centre lands at 0."""
        self.origin = self.origin - self.geometric_centre()
        return self

    def get_bounds(self, th):
        """World bounds [min1 max1 ... minN maxN] of voxel centers with value > th."""
        mask = self.data > th
        if not np.any(mask):
            raise EmptyBoundsError(f"no voxel value exceeds {th}")
        nd = np.stack([a + 1 for a in np.nonzero(mask)]).astype(float)
        pos = self.index_to_world(nd)
        return np.stack([pos.min(axis=1), pos.max(axis=1)], axis=1).ravel()

    def extent_bounds(self):
        """World bounds of the full voxel-center grid (all 2^N corners)."""
        n = self.ndim
        corners = np.array(
            [[1.0 if c >> k & 1 == 0 else float(self.size[k]) for c in range(1 << n)]
             for k in range(n)])
        pos = self.index_to_world(corners)
        return np.stack([pos.min(axis=1), pos.max(axis=1)], axis=1).ravel()

    def extract_frame(self, n):
        """n-th 3D frame of a 4D image (1-based)."""
        if self.ndim != 4:
            raise InvalidArgumentError("extract_frame requires a 4D image")
        if not 1 <= n <= self.size[3]:
            raise InvalidArgumentError(f"frame {n} outside 1..{self.size[3]}")
        return Image(
            self.data[:, :, :, n - 1].copy(),
            self.origin[:3].copy(),
            self.spacing[:3].copy(),
            self.orientation[:3, :3].copy(),
            padding_value=self.padding_value,
            max_chunk_size=self.max_chunk_size,
        )

    def force_2d(self):
        """Drop the single singleton dimension of a 3D image."""
        if self.ndim == 2:
            return self.copy()
        singles = [k for k in range(self.ndim) if self.size[k] == 1]
        if self.ndim != 3 or len(singles) != 1:
            raise InvalidArgumentError(
                "force_2d requires a 3D image with exactly one singleton dimension")
        k = singles[0]
        keep = [i for i in range(3) if i != k]
        return Image(
            np.squeeze(self.data, axis=k).copy(),
            self.origin[keep].copy(),
            self.spacing[keep].copy(),
            _reorthonormalize_submatrix(self.orientation[np.ix_(keep, keep)]),
            padding_value=self.padding_value,
            max_chunk_size=self.max_chunk_size,
        )


def _reorthonormalize_submatrix(m):
    # a 2x2 block of a 3x3 rotation is generally not orthonormal; project it
    u, _, vt = np.linalg.svd(m)
    return u @ vt


def neighborhood_offsets(ndim, n=1, shape="cube"):
    """Integer offset vectors of the width-n neighborhood, center included.

    ``cube``: all offsets in {-n..n}^N. ``ball``: the subset with Euclidean
    norm <= n. Lexicographic order.
    """
    if n < 1:
        raise InvalidArgumentError("neighborhood width must be >= 1")
    if shape not in ("cube", "ball"):
        raise InvalidArgumentError(f"unknown neighborhood shape {shape!r}")
    rng = np.arange(-n, n + 1)
    grids = np.meshgrid(*[rng] * ndim, indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=1)
    if shape == "ball":
        offs = offs[np.sqrt((offs ** 2).sum(axis=1)) <= n]
    return [tuple(int(v) for v in row) for row in offs]
