"""ITK 4x4 matrix text files ("# itkMatrix 4 x 4" + 4 rows of 4 values)."""

from __future__ import annotations

import numpy as np

from ..errors import ParseError

HEADER = "# itkMatrix 4 x 4"


def read_itk_matrix(path):
    with open(path, "r") as fh:
        lines = [ln.strip() for ln in fh.read().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ParseError("missing '# itkMatrix 4 x 4' comment line")
    if len(lines) != 5:
        raise ParseError(f"expected 4 matrix rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        vals = ln.split()
        if len(vals) != 4:
            raise ParseError(f"expected 4 values per row, got {len(vals)}")
        rows.append([float(v) for v in vals])
    return np.array(rows, dtype=float)


def write_itk_matrix(path, matrix):
    m = np.asarray(matrix, dtype=float)
    if m.shape != (4, 4):
        raise ParseError("matrix must be 4 x 4")
    with open(path, "w") as fh:
        fh.write(HEADER + "\n")
        for row in m:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
