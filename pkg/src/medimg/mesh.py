"""Triangulated mesh container, vertex/triangle attributes, and mesh sources."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, ShapeError
from .frame import inplane_axes

DEFAULT_RESOLUTION = 16


@dataclass
class Attribute:
    """Named per-vertex or per-triangle data.

    ``values`` is k x m with one column per element; association (vertex vs
    triangle) is decided by m. Ties (p == t) resolve to vertex association.
    """
    name: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))

    @property
    def num_elements(self):
        return self.values.shape[1]


@dataclass
class Mesh:
    points: np.ndarray      # 3 x p world coordinates
    triangles: np.ndarray   # 3 x t, 1-based vertex indices
    attributes: list = field(default_factory=list)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(3, -1)
        self.triangles = np.asarray(self.triangles, dtype=int).reshape(3, -1)
        p = self.num_points
        if self.triangles.size:
            if self.triangles.min() < 1 or self.triangles.max() > p:
                raise InvalidArgumentError("triangle vertex index out of range")
            t = self.triangles
            if np.any((t[0] == t[1]) | (t[1] == t[2]) | (t[0] == t[2])):
                raise InvalidArgumentError("degenerate triangle (repeated vertex)")
        for a in self.attributes:
            if a.num_elements not in (self.num_points, self.num_triangles):
                raise ShapeError(
                    f"attribute {a.name!r} has {a.num_elements} elements; "
                    f"expected {self.num_points} (vertex) or {self.num_triangles} (triangle)")

    @property
    def num_points(self):
        return self.points.shape[1]

    @property
    def num_triangles(self):
        return self.triangles.shape[1]

    def attribute_association(self, attr: Attribute):
        """'vertex' or 'triangle'; a p == t tie resolves to 'vertex'."""
        if attr.num_elements == self.num_points:
            return "vertex"
        return "triangle"

    def edges(self):
        """All undirected edges as sorted (i, j) pairs, one per occurrence."""
        t = self.triangles
        e = np.concatenate([t[[0, 1]], t[[1, 2]], t[[2, 0]]], axis=1)
        return np.sort(e, axis=0)

    def euler_characteristic(self):
        unique_edges = np.unique(self.edges().T, axis=0)
        return self.num_points - unique_edges.shape[0] + self.num_triangles


def _check_positive(value, name):
    if np.any(np.asarray(value, dtype=float) <= 0):
        raise InvalidArgumentError(f"{name} must be positive")


def box_mesh(center, dims):
    """Closed axis-aligned box: 8 vertices, 12 outward-facing triangles."""
    center = np.asarray(center, dtype=float).ravel()
    dims = np.asarray(dims, dtype=float).ravel()
    _check_positive(dims, "dims")
    h = dims / 2.0
    corners = np.array([[x, y, z] for z in (-h[2], h[2])
                        for y in (-h[1], h[1])
                        for x in (-h[0], h[0])])  # binary order: x fastest
    points = (center[None, :] + corners).T
    # 1-based corner ids; each face split into two triangles, outward winding
    quads = [
        (1, 3, 4, 2),  # z = -h
        (5, 6, 8, 7),  # z = +h
        (1, 2, 6, 5),  # y = -h
        (3, 7, 8, 4),  # y = +h
        (1, 5, 7, 3),  # x = -h
        (2, 4, 8, 6),  # x = +h
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return Mesh(points, np.asarray(tris).T)


def sphere_mesh(center, radius, resolution=DEFAULT_RESOLUTION):
    """Latitude-longitude sphere; poles are single vertices with triangle fans."""
    return ellipsoid_mesh(center, (radius, radius, radius), resolution)


def ellipsoid_mesh(center, radii, resolution=DEFAULT_RESOLUTION):
    center = np.asarray(center, dtype=float).ravel()
    radii = np.asarray(radii, dtype=float).ravel()
    _check_positive(radii, "radii")
    if resolution < 3:
        raise InvalidArgumentError("resolution must be >= 3")
    res = int(resolution)
    pts = [center + radii * np.array([0, 0, 1.0])]   # north pole, id 1
    for i in range(1, res):          # latitude rings
        th = np.pi * i / res
        for j in range(res):         # longitude
            ph = 2 * np.pi * j / res
            pts.append(center + radii * np.array(
                [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]))
    pts.append(center + radii * np.array([0, 0, -1.0]))  # south pole
    south = len(pts)

    def ring(i, j):
        return 2 + (i - 1) * res + (j % res)

    tris = []
    for j in range(res):  # north fan
        tris.append((1, ring(1, j), ring(1, j + 1)))
    for i in range(1, res - 1):  # quad strips
        for j in range(res):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            tris.append((a, c, d))
            tris.append((a, d, b))
    for j in range(res):  # south fan
        tris.append((south, ring(res - 1, j + 1), ring(res - 1, j)))
    return Mesh(np.asarray(pts).T, np.asarray(tris).T)


def cylinder_mesh(axis, center, radius, height, resolution=DEFAULT_RESOLUTION):
    """Closed cylinder aligned to ``axis``: side quads plus two cap fans."""
    axis = np.asarray(axis, dtype=float).ravel()
    if np.linalg.norm(axis) == 0:
        raise InvalidArgumentError("cylinder axis must be nonzero")
    center = np.asarray(center, dtype=float).ravel()
    _check_positive(radius, "radius")
    _check_positive(height, "height")
    if resolution < 3:
        raise InvalidArgumentError("resolution must be >= 3")
    res = int(resolution)
    u, v, n = inplane_axes(axis)
    top_c = center + n * height / 2.0
    bot_c = center - n * height / 2.0
    pts = [top_c, bot_c]
    for j in range(res):
        ph = 2 * np.pi * j / res
        rim = radius * (np.cos(ph) * u + np.sin(ph) * v)
        pts.append(top_c + rim)
    for j in range(res):
        ph = 2 * np.pi * j / res
        rim = radius * (np.cos(ph) * u + np.sin(ph) * v)
        pts.append(bot_c + rim)

    def top(j):
        return 3 + j % res

    def bot(j):
        return 3 + res + j % res

    tris = []
    for j in range(res):  # top cap fan (outward = +n)
        tris.append((1, top(j), top(j + 1)))
    for j in range(res):  # bottom cap fan (outward = -n)
        tris.append((2, bot(j + 1), bot(j)))
    for j in range(res):  # side quads
        tris.append((top(j), bot(j), bot(j + 1)))
        tris.append((top(j), bot(j + 1), top(j + 1)))
    return Mesh(np.asarray(pts).T, np.asarray(tris).T)


def plane_mesh(point, normal, scale=1.0):
    """Square of side ``scale`` centered at ``point``, orthogonal to ``normal``."""
    point = np.asarray(point, dtype=float).ravel()
    _check_positive(scale, "scale")
    a1, a2, _ = inplane_axes(normal)
    h = scale / 2.0
    pts = np.stack([
        point - h * a1 - h * a2,
        point + h * a1 - h * a2,
        point + h * a1 + h * a2,
        point - h * a1 + h * a2,
    ]).T
    tris = np.array([[1, 2, 3], [1, 3, 4]]).T
    return Mesh(pts, tris)
