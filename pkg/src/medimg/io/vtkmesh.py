"""Legacy ASCII VTK POLYDATA mesh reader and writer.

Supported subset: POINTS, POLYGONS (triangles only), and POINT_DATA /
CELL_DATA sections with SCALARS and VECTORS arrays mapped to attributes.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParseError, UnsupportedCellError
from ..mesh import Attribute, Mesh


def _tokens(text):
    for line in text.splitlines():
        line = line.strip()
        if line:
            yield line


def read_vtk_mesh(path):
    with open(path, "r") as fh:
        lines = list(_tokens(fh.read()))
    if len(lines) < 4 or not lines[0].startswith("# vtk DataFile"):
        raise ParseError("missing VTK DataFile header line")
    if lines[2].upper() != "ASCII":
        raise ParseError("only ASCII legacy VTK files are supported")
    if "POLYDATA" not in lines[3].upper():
        raise ParseError("only DATASET POLYDATA is supported")

    pos = 4
    points = None
    triangles = np.zeros((3, 0), dtype=int)
    attributes = []
    section = None  # 'point' or 'cell' data section

    def take_floats(count, start):
        vals = []
        i = start
        while len(vals) < count:
            if i >= len(lines):
                raise ParseError("unexpected end of file in value block")
            vals.extend(float(v) for v in lines[i].split())
            i += 1
        if len(vals) != count:
            raise ParseError("value block length mismatch")
        return np.array(vals), i

    while pos < len(lines):
        parts = lines[pos].split()
        key = parts[0].upper()
        if key == "POINTS":
            n = int(parts[1])
            flat, pos = take_floats(3 * n, pos + 1)
            points = flat.reshape(n, 3).T
        elif key == "POLYGONS":
            n = int(parts[1]); total = int(parts[2])
            flat, pos = take_floats(total, pos + 1)
            flat = flat.astype(int)
            tris, i = [], 0
            for _ in range(n):
                c = flat[i]
                if c != 3:
                    raise UnsupportedCellError(
                        f"POLYGONS cell with {c} sides; only triangles supported")
                tris.append(flat[i + 1:i + 4] + 1)  # file is 0-based
                i += c + 1
            triangles = np.asarray(tris, dtype=int).T
        elif key == "POINT_DATA":
            section = "point"
            pos += 1
        elif key == "CELL_DATA":
            section = "cell"
            pos += 1
        elif key == "SCALARS":
            name = parts[1]
            comps = int(parts[3]) if len(parts) > 3 else 1
            count = points.shape[1] if section == "point" else triangles.shape[1]
            nxt = pos + 1
            if nxt < len(lines) and lines[nxt].upper().startswith("LOOKUP_TABLE"):
                nxt += 1
            flat, pos = take_floats(count * comps, nxt)
            attributes.append(Attribute(name, flat.reshape(count, comps).T))
        elif key == "VECTORS":
            name = parts[1]
            count = points.shape[1] if section == "point" else triangles.shape[1]
            flat, pos = take_floats(count * 3, pos + 1)
            attributes.append(Attribute(name, flat.reshape(count, 3).T))
        else:
            raise ParseError(f"unsupported VTK section {parts[0]!r}")
    if points is None:
        raise ParseError("VTK file has no POINTS section")
    return Mesh(points, triangles, attributes)


def write_vtk_mesh(path, mesh):
    out = [
        "# vtk DataFile Version 3.0",
        "mesh",
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {mesh.num_points} double",
    ]
    for k in range(mesh.num_points):
        out.append(" ".join(repr(float(v)) for v in mesh.points[:, k]))
    t = mesh.num_triangles
    out.append(f"POLYGONS {t} {4 * t}")
    for k in range(t):
        i, j, l = (mesh.triangles[:, k] - 1).tolist()
        out.append(f"3 {i} {j} {l}")

    vertex_attrs = [a for a in mesh.attributes
                    if mesh.attribute_association(a) == "vertex"]
    cell_attrs = [a for a in mesh.attributes
                  if mesh.attribute_association(a) == "triangle"]
    for header, attrs in ((f"POINT_DATA {mesh.num_points}", vertex_attrs),
                          (f"CELL_DATA {t}", cell_attrs)):
        if not attrs:
            continue
        out.append(header)
        for a in attrs:
            k = a.values.shape[0]
            if k == 3:
                out.append(f"VECTORS {a.name} double")
                for c in range(a.num_elements):
                    out.append(" ".join(repr(float(v)) for v in a.values[:, c]))
            else:
                out.append(f"SCALARS {a.name} double {k}")
                out.append("LOOKUP_TABLE default")
                for c in range(a.num_elements):
                    out.append(" ".join(repr(float(v)) for v in a.values[:, c]))
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
