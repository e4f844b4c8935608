"""Slice-frame construction and canonicalization.

A slice frame is a 4x4 matrix: columns 1..2 are in-plane unit axes, column 3
the unit plane normal, column 4 the plane origin point (homogeneous). The
plane-form constructor is deterministic so oblique slices are reproducible.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, InvalidGeometryError


def inplane_axes(normal):
    """Deterministic in-plane unit axes for a plane normal.

    The first axis is the normalized rejection of the canonical axis least
    aligned with the normal; the second is normal x first.
    """
    n = np.asarray(normal, dtype=float).ravel()
    if n.size != 3 or np.linalg.norm(n) == 0:
        raise InvalidArgumentError("plane normal must be a nonzero 3-vector")
    n = n / np.linalg.norm(n)
    e = np.zeros(3)
    e[int(np.argmin(np.abs(n)))] = 1.0
    a1 = e - np.dot(e, n) * n
    a1 /= np.linalg.norm(a1)
    a2 = np.cross(n, a1)
    return a1, a2, n


def plane_frame(normal, point):
    """Slice frame through ``point`` orthogonal to ``normal``."""
    a1, a2, n = inplane_axes(normal)
    point = np.asarray(point, dtype=float).ravel()
    if point.size != 3:
        raise InvalidArgumentError("plane point must be a 3-vector")
    m = np.eye(4)
    m[:3, 0] = a1
    m[:3, 1] = a2
    m[:3, 2] = n
    m[:3, 3] = point
    return m


def canonicalize_frame(matrix, tol=1e-9):
    """Re-orthonormalize a frame's rotation block (Gram-Schmidt on a1, a2).

    The normal is rebuilt as a1 x a2 so the block stays right-handed.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (4, 4):
        raise InvalidArgumentError("frame must be a 4x4 matrix")
    if not np.allclose(m[3], [0, 0, 0, 1], atol=1e-6):
        raise InvalidGeometryError("frame bottom row must be (0, 0, 0, 1)")
    a1 = m[:3, 0]
    if np.linalg.norm(a1) == 0:
        raise InvalidGeometryError("frame axis 1 is zero")
    a1 = a1 / np.linalg.norm(a1)
    a2 = m[:3, 1] - np.dot(m[:3, 1], a1) * a1
    if np.linalg.norm(a2) == 0:
        raise InvalidGeometryError("frame axes are collinear")
    a2 = a2 / np.linalg.norm(a2)
    out = np.eye(4)
    out[:3, 0] = a1
    out[:3, 1] = a2
    out[:3, 2] = np.cross(a1, a2)
    out[:3, 3] = m[:3, 3]
    return out


def validate_frame(matrix, tol=1e-9):
    m = np.asarray(matrix, dtype=float)
    if m.shape != (4, 4):
        raise InvalidArgumentError("frame must be a 4x4 matrix")
    r = m[:3, :3]
    if not np.allclose(r.T @ r, np.eye(3), atol=tol):
        raise InvalidGeometryError("frame rotation block is not orthonormal")
    if not np.allclose(m[3], [0, 0, 0, 1], atol=tol):
        raise InvalidGeometryError("frame bottom row must be (0, 0, 0, 1)")
    return m
