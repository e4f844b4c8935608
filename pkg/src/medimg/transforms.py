"""Rigid transforms and B-spline free-form deformation.

Rigid parameterization: 2D (tx, ty, theta); 3D (tx, ty, tz, rx, ry, rz) with
rotation applied as Rz @ Ry @ Rx. The transform maps x -> R (x - c) + c + t
with c the rotation centre (the reference image's geometric centre for image
warps). Warping is pull-back: each output voxel samples the moving image at
the inverse-transformed position with linear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateGridError,
    InvalidArgumentError,
    NotRigidError,
)
from .image import Image

_RIGID_TOL = 1e-6


def _rotation_matrix(params, ndim):
    if ndim == 2:
        th = params[2]
        c, s = np.cos(th), np.sin(th)
        return np.array([[c, -s], [s, c]])
    rx, ry, rz = params[3:6]
    cx, sx = np.cos(rx), np.sin(rx)
    cy, sy = np.cos(ry), np.sin(ry)
    cz, sz = np.cos(rz), np.sin(rz)
    mx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    my = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    mz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return mz @ my @ mx


def rigid_params_to_matrix(params, centre=None):
    """Homogeneous (N+1)x(N+1) matrix for rigid params about ``centre``."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size == 3:
        ndim = 2
    elif params.size == 6:
        ndim = 3
    else:
        raise InvalidArgumentError("rigid params must have 3 (2D) or 6 (3D) entries")
    centre = np.zeros(ndim) if centre is None \
        else np.asarray(centre, dtype=float).ravel()
    r = _rotation_matrix(params, ndim)
    t = params[:ndim]
    m = np.eye(ndim + 1)
    m[:ndim, :ndim] = r
    m[:ndim, ndim] = centre - r @ centre + t
    return m


def matrix_to_rigid_params(matrix, centre=None):
    """Recover (t, angles) from a rigid homogeneous matrix about ``centre``."""
    m = np.asarray(matrix, dtype=float)
    ndim = m.shape[0] - 1
    if m.shape != (ndim + 1, ndim + 1) or ndim not in (2, 3):
        raise InvalidArgumentError("matrix must be 3x3 (2D) or 4x4 (3D)")
    r = m[:ndim, :ndim]
    if not np.allclose(r.T @ r, np.eye(ndim), atol=_RIGID_TOL) \
            or np.linalg.det(r) < 0:
        raise NotRigidError("matrix rotation block is not a proper rotation")
    centre = np.zeros(ndim) if centre is None \
        else np.asarray(centre, dtype=float).ravel()
    t = m[:ndim, ndim] - centre + r @ centre
    if ndim == 2:
        theta = np.arctan2(r[1, 0], r[0, 0])
        return np.array([t[0], t[1], theta])
    # Rz @ Ry @ Rx decomposition
    ry = np.arcsin(-np.clip(r[2, 0], -1.0, 1.0))
    if abs(np.cos(ry)) > 1e-9:
        rx = np.arctan2(r[2, 1], r[2, 2])
        rz = np.arctan2(r[1, 0], r[0, 0])
    else:  # gimbal lock
        rx = np.arctan2(-r[1, 2], r[1, 1])
        rz = 0.0
    return np.array([t[0], t[1], t[2], rx, ry, rz])


def transform_rigid(moving, params, ref=None):
    """Pull-back rigid warp of ``moving`` onto the grid of ``ref``."""
    ref = moving if ref is None else ref
    params = np.asarray(params, dtype=float).ravel()
    expected = 3 if ref.ndim == 2 else 6
    if moving.ndim != ref.ndim or params.size != expected:
        raise InvalidArgumentError(
            f"params length {params.size} does not match {ref.ndim}D images")
    m = rigid_params_to_matrix(params, centre=ref.geometric_centre())
    minv = np.linalg.inv(m)
    positions = ref.index_to_world()
    n = ref.ndim
    out = np.empty(positions.shape[1])
    step = max(1, int(moving.max_chunk_size))
    for start in range(0, positions.shape[1], step):
        sl = slice(start, start + step)
        chunk = positions[:, sl]
        mapped = minv[:n, :n] @ chunk + minv[:n, n][:, None]
        out[sl] = moving.get_value(mapped, mode="linear")
    return Image(out.reshape(tuple(ref.size), order="F"),
                 ref.origin, ref.spacing, ref.orientation,
                 padding_value=moving.padding_value,
                 max_chunk_size=moving.max_chunk_size)


# -- free-form deformation ------------------------------------------------


@dataclass
class FfdLevel:
    origin: np.ndarray    # world coords of control point (1, ...)
    spacing: np.ndarray   # control grid spacing (mm)
    size: np.ndarray      # control points per dimension

    @property
    def num_params(self):
        return int(self.origin.size * np.prod(self.size))


@dataclass
class FfdState:
    degree: int
    levels: list
    bounds: np.ndarray

    @property
    def num_params(self):
        return sum(level.num_params for level in self.levels)

    def split_params(self, params):
        params = np.asarray(params, dtype=float).ravel()
        if params.size != self.num_params:
            raise InvalidArgumentError(
                f"params length {params.size} != expected {self.num_params}")
        out = []
        start = 0
        for level in self.levels:
            n = level.num_params
            coeff = params[start:start + n].reshape(
                (level.origin.size,) + tuple(level.size))
            out.append(coeff)
            start += n
        return out


def ffd_initialize(image, degree=1, levels=1, grid_spacing=None, bounds=-1):
    """Control-grid setup for a multi-level B-spline FFD.

    ``bounds`` is a 2N world-bounds vector or -1 for the image bounds. Each
    level halves the previous level's control spacing. The grid covers the
    bounds padded by ``degree`` control points on every side.
    """
    if degree < 1:
        raise InvalidArgumentError("B-spline degree must be >= 1")
    if levels < 1:
        raise InvalidArgumentError("level count must be >= 1")
    n = image.ndim
    grid_spacing = np.asarray(grid_spacing, dtype=float).ravel()
    if grid_spacing.size != n or np.any(grid_spacing <= 0):
        raise InvalidArgumentError("grid_spacing must be a positive N-vector")
    if np.isscalar(bounds) and bounds == -1:
        bvec = image.extent_bounds()
    else:
        bvec = np.asarray(bounds, dtype=float).ravel()
        if bvec.size != 2 * n:
            raise InvalidArgumentError(f"bounds must have {2 * n} entries")
    lo, hi = bvec[0::2], bvec[1::2]
    if np.any(grid_spacing > (hi - lo)):
        raise DegenerateGridError("grid spacing exceeds the image extent")
    level_list = []
    sp = grid_spacing.astype(float)
    for _ in range(int(levels)):
        interior = np.ceil((hi - lo) / sp).astype(int) + 1
        size = interior + 2 * degree
        origin = lo - degree * sp
        level_list.append(FfdLevel(origin.copy(), sp.copy(), size))
        sp = sp / 2.0
    return FfdState(int(degree), level_list, bvec)


def bspline_basis(degree, t):
    """Centered cardinal B-spline of a degree, evaluated at offsets ``t``."""
    t = np.asarray(t, dtype=float)
    return _nd(degree, t + (degree + 1) / 2.0)


def _nd(degree, x):
    """Uncentered cardinal B-spline N_degree on [0, degree+1]."""
    if degree == 0:
        return ((x >= 0) & (x < 1)).astype(float)
    return (x / degree) * _nd(degree - 1, x) \
        + ((degree + 1 - x) / degree) * _nd(degree - 1, x - 1)


def ffd_displacement(state, params, positions):
    """Displacement field d(x) summed over levels at N x m world positions."""
    coeffs = state.split_params(params)
    n, m = positions.shape
    disp = np.zeros((n, m))
    d = state.degree
    half = (d + 1) / 2.0
    for level, coeff in zip(state.levels, coeffs):
        g = (positions - level.origin[:, None]) / level.spacing[:, None]
        lo = np.ceil(g - half).astype(int)
        offsets = np.arange(d + 1)
        # per-axis weights for each of the d+1 contributing controls
        weights = []
        for k in range(n):
            idx = lo[k][:, None] + offsets[None, :]
            weights.append((idx, bspline_basis(d, g[k][:, None] - idx)))
        combo = np.zeros(m)
        idx_buf = np.empty((n, m), dtype=int)
        for flat in range(int((d + 1) ** n)):
            rem = flat
            w = np.ones(m)
            valid = np.ones(m, dtype=bool)
            for k in range(n):
                o = rem % (d + 1)
                rem //= d + 1
                idx, wk = weights[k]
                idx_buf[k] = idx[:, o]
                w *= wk[:, o]
                valid &= (idx_buf[k] >= 0) & (idx_buf[k] < level.size[k])
            if not np.any(valid):
                continue
            sel = tuple(idx_buf[:, valid])
            contrib = coeff[(slice(None),) + sel]  # (n, m_valid)
            disp[:, valid] += w[valid] * contrib
    return disp


def transform_ffd(moving, params, state, ref=None):
    """Pull-back FFD warp: sample moving at x + d(x) for each ref-grid voxel."""
    ref = moving if ref is None else ref
    positions = ref.index_to_world()
    out = np.empty(positions.shape[1])
    step = max(1, int(moving.max_chunk_size))
    for start in range(0, positions.shape[1], step):
        sl = slice(start, start + step)
        chunk = positions[:, sl]
        disp = ffd_displacement(state, params, chunk)
        out[sl] = moving.get_value(chunk + disp, mode="linear")
    return Image(out.reshape(tuple(ref.size), order="F"),
                 ref.origin, ref.spacing, ref.orientation,
                 padding_value=moving.padding_value,
                 max_chunk_size=moving.max_chunk_size)
