"""Core geometric filters: crop, resample, oblique reslice, gradients, masks."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .errors import (
    EmptyCropError,
    InvalidArgumentError,
    InvalidGeometryError,
)
from .frame import plane_frame, validate_frame
from .image import Image, round_half_away


def _chunked_sample(source, positions, mode, out, chunk_size):
    """Fill ``out`` by sampling ``source`` at positions, chunked by voxel count."""
    m = positions.shape[1]
    step = max(1, int(chunk_size))
    for start in range(0, m, step):
        sl = slice(start, min(start + step, m))
        out[sl] = source.get_value(positions[:, sl], mode=mode)
    return out


def _grid_positions(image):
    """World positions of every voxel of ``image`` in storage order (chunk-free)."""
    return image.index_to_world()


def crop(image, bounds):
    """Crop to the world-coordinate box [min1 max1 ... minN maxN].

    Keeps voxels whose centers lie inside the bounds (inclusive); bounds are
    clamped to the extent. Origin moves to the first kept voxel.
    """
    bounds = np.asarray(bounds, dtype=float).ravel()
    n = image.ndim
    if bounds.size != 2 * n:
        raise InvalidArgumentError(f"bounds must have {2 * n} entries")
    lo, hi = bounds[0::2], bounds[1::2]
    if np.any(lo > hi):
        raise InvalidArgumentError("bounds must be ordered min <= max per dimension")
    pos = _grid_positions(image)
    inside = np.all((pos >= lo[:, None]) & (pos <= hi[:, None]), axis=0)
    if not np.any(inside):
        raise EmptyCropError("crop bounds do not contain any voxel center")
    nd = np.stack([g.ravel(order="F") for g in np.meshgrid(
        *[np.arange(1, s + 1) for s in image.size], indexing="ij")])
    kept = nd[:, inside]
    first, last = kept.min(axis=1), kept.max(axis=1)
    slicer = tuple(slice(f - 1, l) for f, l in zip(first, last))
    return Image(
        image.data[slicer].copy(),
        image.index_to_world(first.astype(float)),
        image.spacing.copy(),
        image.orientation.copy(),
        padding_value=image.padding_value,
        max_chunk_size=image.max_chunk_size,
    )


def _blur(image, neigh, sigma):
    """Separable truncated Gaussian, extent +-neigh voxels, sigma in voxels."""
    neigh = np.asarray(neigh, dtype=int).ravel()
    sigma = np.asarray(sigma, dtype=float).ravel()
    if neigh.size != image.ndim or sigma.size != image.ndim:
        raise InvalidArgumentError("blur neigh/sigma must be N-vectors")
    data = image.data
    for axis in range(image.ndim):
        x = np.arange(-neigh[axis], neigh[axis] + 1, dtype=float)
        k = np.exp(-0.5 * (x / sigma[axis]) ** 2)
        k /= k.sum()
        data = ndimage.convolve1d(data, k, axis=axis, mode="nearest")
    out = Image.like(image, data=data)
    return out


def resample(image, reference=None, spacing=None, spacing_and_size=None,
             spacing_and_size_and_centre=None, interpolation="linear",
             blur=None):
    """Resample onto a new grid given by a reference image or a grid spec.

    Exactly one of ``reference``, ``spacing``, ``spacing_and_size``,
    ``spacing_and_size_and_centre`` must be given. ``blur`` is an optional
    (neigh, sigma) pair applied to the input before sampling.
    """
    n = image.ndim
    specs = [s is not None for s in
             (reference, spacing, spacing_and_size, spacing_and_size_and_centre)]
    if sum(specs) != 1:
        raise InvalidArgumentError("exactly one grid specification is required")

    if reference is not None:
        target = Image.zeros(reference.size, reference.origin, reference.spacing,
                             reference.orientation)
    elif spacing is not None:
        sp = np.asarray(spacing, dtype=float).ravel()
        if sp.size != n:
            raise InvalidArgumentError(f"spacing must have {n} entries")
        if np.any(sp <= 0):
            raise InvalidGeometryError("spacing must be positive")
        new_size = np.maximum(
            round_half_away(image.size * image.spacing / sp).astype(int), 1)
        target = Image.zeros(new_size, image.origin, sp, image.orientation)
    else:
        vec = np.asarray(
            spacing_and_size if spacing_and_size is not None
            else spacing_and_size_and_centre, dtype=float).ravel()
        want = 2 * n if spacing_and_size is not None else 3 * n
        if vec.size != want:
            raise InvalidArgumentError(f"grid vector must have {want} entries")
        sp = vec[:n]
        size = vec[n:2 * n].astype(int)
        if np.any(sp <= 0):
            raise InvalidGeometryError("spacing must be positive")
        if np.any(size < 1):
            raise InvalidGeometryError("size must be positive")
        centre = vec[2 * n:] if spacing_and_size_and_centre is not None \
            else image.geometric_centre()
        origin = centre - image.orientation @ (sp * (size - 1) / 2.0)
        target = Image.zeros(size, origin, sp, image.orientation)

    source = _blur(image, *blur) if blur is not None else image
    positions = _grid_positions(target)
    out = np.empty(target.num_voxels)
    _chunked_sample(source, positions, interpolation, out, image.max_chunk_size)
    result = Image(
        out.reshape(tuple(target.size), order="F"),
        target.origin, target.spacing, target.orientation,
        padding_value=image.padding_value,
        max_chunk_size=image.max_chunk_size,
    )
    return result


def reslice(volume, frame=None, normal=None, point=None, spacing=None,
            thickness=1):
    """Oblique slice of a 3D volume.

    Either a 4x4 slice frame or a plane (normal, point) must be given.
    Returns (slice3d, slice2d): a one-voxel-thick oriented 3D image and its
    2D projection. ``thickness`` (odd) averages that many samples along the
    normal, spaced one in-plane step apart, centered on the plane.
    """
    if volume.ndim != 3:
        raise InvalidArgumentError("reslice requires a 3D volume")
    if frame is None:
        if normal is None or point is None:
            raise InvalidArgumentError("either frame or (normal, point) required")
        frame = plane_frame(normal, point)
    else:
        frame = validate_frame(frame)
    thickness = int(thickness)
    if thickness < 1 or thickness % 2 == 0:
        raise InvalidArgumentError("thickness must be an odd positive integer")
    if spacing is None:
        sp = float(volume.spacing.min())
        spacing = np.array([sp, sp])
    else:
        spacing = np.asarray(spacing, dtype=float).ravel()
        if spacing.size != 2 or np.any(spacing <= 0):
            raise InvalidArgumentError("in-plane spacing must be a positive 2-vector")

    a1, a2, nrm = frame[:3, 0], frame[:3, 1], frame[:3, 2]
    p0 = frame[:3, 3]
    corners = volume.extent_bounds().reshape(3, 2)
    rel = np.array([[corners[k, c >> k & 1] for k in range(3)]
                    for c in range(8)]).T - p0[:, None]
    u = a1 @ rel
    v = a2 @ rel
    w = int(np.floor((u.max() - u.min()) / spacing[0])) + 1
    h = int(np.floor((v.max() - v.min()) / spacing[1])) + 1
    slice_origin = p0 + u.min() * a1 + v.min() * a2

    orient = np.stack([a1, a2, nrm], axis=1)
    target = Image.zeros((w, h, 1), slice_origin,
                         np.array([spacing[0], spacing[1], spacing.min()]),
                         orient)
    positions = _grid_positions(target)
    acc = np.zeros(positions.shape[1])
    half = (thickness - 1) // 2
    step = float(spacing.min())
    for j in range(-half, half + 1):
        shifted = positions + (j * step) * nrm[:, None]
        sample = np.empty(positions.shape[1])
        _chunked_sample(volume, shifted, "linear", sample, volume.max_chunk_size)
        acc += sample
    acc /= thickness
    slice3d = Image(acc.reshape((w, h, 1), order="F"),
                    target.origin, target.spacing, target.orientation,
                    padding_value=volume.padding_value,
                    max_chunk_size=volume.max_chunk_size)
    return slice3d, slice3d.force_2d()


def _gaussian_derivative_kernel(order, sigma, half_width):
    """Sampled Gaussian-derivative kernel with vanishing moments 0..order-1 and
    o-th moment scaled so a unit polynomial x^o/o! responds with 1 (per voxel)."""
    x = np.arange(-half_width, half_width + 1, dtype=float)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    if order == 0:
        return g / g.sum()
    # derivative of the Gaussian of the requested order (Hermite recurrence)
    hs = [np.ones_like(x), x / sigma ** 2]
    for _ in range(2, order + 1):
        k = len(hs)
        hs.append((x / sigma ** 2) * hs[-1] - (k - 1) / sigma ** 2 * hs[-2])
    kern = hs[order] * g * (-1.0) ** order
    # enforce exact vanishing moments below `order`, then normalize the o-th
    basis = np.stack([x ** j for j in range(order)])
    coeffs = np.linalg.lstsq(
        (basis @ basis.T), basis @ kern, rcond=None)[0]
    kern = kern - coeffs @ basis
    # correlation response to x^order / order!
    resp = np.sum(kern * x ** order) / math.factorial(order)
    kern /= resp
    return kern


def gradient(image, order=1, sigma=None):
    """Derivative-of-Gaussian gradient; one output image per dimension.

    Components are expressed per world millimetre. Edges replicate.
    """
    order = int(order)
    if order < 1:
        raise InvalidArgumentError("derivative order must be >= 1")
    n = image.ndim
    if sigma is None:
        sigma = np.ones(n)
    else:
        sigma = np.asarray(sigma, dtype=float).ravel()
        if sigma.size != n or np.any(sigma <= 0):
            raise InvalidArgumentError("sigma must be a positive N-vector")
    out = []
    for axis in range(n):
        data = image.data
        for k in range(n):
            hw = int(np.ceil(3.0 * sigma[k]))
            if k == axis:
                kern = _gaussian_derivative_kernel(order, sigma[k], hw)
                # per-voxel response -> per-mm
                kern = kern / image.spacing[k] ** order
                # correlation kernel; convolve1d flips, so flip here
                kern = kern[::-1]
            else:
                kern = _gaussian_derivative_kernel(0, sigma[k], hw)
            data = ndimage.convolve1d(data, kern, axis=k, mode="nearest")
        out.append(Image.like(image, data=data))
    return out


def _point_in_polygon(px, py, vx, vy):
    """Even-odd rule point-in-polygon test, vectorized over points."""
    inside = np.zeros(px.shape, dtype=bool)
    nv = len(vx)
    j = nv - 1
    for i in range(nv):
        crosses = ((vy[i] > py) != (vy[j] > py))
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (vx[j] - vx[i]) * (py - vy[i]) / (vy[j] - vy[i]) + vx[i]
        inside ^= crosses & (px < xint)
        j = i
    return inside


def rasterize_polygon(slice_image, vertices):
    """Binary mask of a polygon (world coords, even-odd rule) on a 2D grid."""
    if slice_image.ndim != 2:
        raise InvalidArgumentError("rasterize_polygon requires a 2D slice")
    verts = np.asarray(vertices, dtype=float).reshape(2, -1)
    if verts.shape[1] < 3:
        raise InvalidArgumentError("polygon needs at least 3 vertices")
    pos = _grid_positions(slice_image)
    inside = _point_in_polygon(pos[0], pos[1], verts[0], verts[1])
    return Image.like(slice_image,
                      data=inside.astype(float).reshape(
                          tuple(slice_image.size), order="F"))


def rasterize_ellipse(slice_image, center, radii, angle=0.0):
    """Binary mask of a (rotated) ellipse on a 2D grid."""
    if slice_image.ndim != 2:
        raise InvalidArgumentError("rasterize_ellipse requires a 2D slice")
    center = np.asarray(center, dtype=float).ravel()
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size != 2 or np.any(radii <= 0):
        raise InvalidArgumentError("ellipse radii must be a positive 2-vector")
    pos = _grid_positions(slice_image) - center[:, None]
    c, s = np.cos(-angle), np.sin(-angle)
    x = c * pos[0] - s * pos[1]
    y = s * pos[0] + c * pos[1]
    inside = (x / radii[0]) ** 2 + (y / radii[1]) ** 2 <= 1.0
    return Image.like(slice_image,
                      data=inside.astype(float).reshape(
                          tuple(slice_image.size), order="F"))
