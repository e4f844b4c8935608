"""STL mesh reader (binary and ASCII) and binary writer.

Reading welds duplicate vertices within 1e-6 mm absolute so shared-vertex
topology is rebuilt from the per-triangle soup.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import ParseError, TruncatedDataError
from ..mesh import Mesh

WELD_TOLERANCE = 1e-6


def _weld(raw_vertices):
    """Map a (3n, 3) vertex soup to unique points and 1-based indices."""
    keys = np.round(raw_vertices / WELD_TOLERANCE).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True,
                                  return_inverse=True)
    inverse = inverse.ravel()
    # keep first-appearance order for stable point numbering
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    points = raw_vertices[first[order]].T
    indices = rank[inverse] + 1
    return points, indices


def read_stl(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:6].lower().startswith(b"solid") and b"facet" in blob[:512]:
        return _read_ascii(blob)
    return _read_binary(blob)


def _read_binary(blob):
    if len(blob) < 84:
        raise TruncatedDataError("binary STL shorter than header + count")
    (count,) = struct.unpack_from("<I", blob, 80)
    needed = 84 + 50 * count
    if len(blob) < needed:
        raise TruncatedDataError(
            f"binary STL truncated: {count} triangles promised, file too short")
    rec = np.frombuffer(blob, dtype=np.uint8, count=50 * count, offset=84)
    rec = rec.reshape(count, 50)
    tri_floats = rec[:, :48].copy().view("<f4").reshape(count, 12)
    verts = tri_floats[:, 3:12].reshape(count * 3, 3).astype(np.float64)
    points, indices = _weld(verts)
    return Mesh(points, indices.reshape(count, 3).T)


def _read_ascii(blob):
    verts = []
    for line in blob.decode("latin-1").splitlines():
        parts = line.split()
        if parts[:1] == ["vertex"]:
            if len(parts) != 4:
                raise ParseError(f"malformed STL vertex line: {line!r}")
            verts.append([float(v) for v in parts[1:]])
    if not verts or len(verts) % 3:
        raise TruncatedDataError("ASCII STL vertex count is not a multiple of 3")
    verts = np.asarray(verts)
    points, indices = _weld(verts)
    return Mesh(points, indices.reshape(-1, 3).T)


def write_stl(path, mesh):
    t = mesh.num_triangles
    pts = mesh.points.T.astype(np.float32)
    tris = mesh.triangles.T - 1
    with open(path, "wb") as fh:
        fh.write(b"\0" * 80)
        fh.write(struct.pack("<I", t))
        records = np.zeros((t, 50), dtype=np.uint8)
        a = pts[tris[:, 0]]
        b = pts[tris[:, 1]]
        c = pts[tris[:, 2]]
        normals = np.cross(b - a, c - a)
        lens = np.linalg.norm(normals, axis=1, keepdims=True)
        normals = np.where(lens > 0, normals / np.where(lens == 0, 1, lens), 0.0)
        floats = np.concatenate([normals.astype(np.float32), a, b, c], axis=1)
        records[:, :48] = floats.astype("<f4").view(np.uint8).reshape(t, 48)
        fh.write(records.tobytes())
