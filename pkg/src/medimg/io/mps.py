"""MITK point-set (*.mps) XML reader and writer."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParseError, InvalidArgumentError


@dataclass
class PointSet:
    points: np.ndarray                 # 3 x m
    ids: np.ndarray = None             # m integer labels

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(3, -1)
        m = self.points.shape[1]
        if self.ids is None:
            self.ids = np.arange(m, dtype=int)
        else:
            self.ids = np.asarray(self.ids, dtype=int).ravel()
        if self.ids.size != m:
            raise InvalidArgumentError("ids length must match point count")
        if len(set(self.ids.tolist())) != m:
            raise InvalidArgumentError("point ids must be unique")

    @property
    def num_points(self):
        return self.points.shape[1]


def read_mps(path):
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ParseError(f"malformed MPS XML: {exc}") from exc
    ids, pts = [], []
    for point in tree.getroot().iter("point"):
        try:
            ids.append(int(point.findtext("id")))
            pts.append([float(point.findtext(axis)) for axis in "xyz"])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed MPS point element: {exc}") from exc
    pts = np.array(pts, dtype=float).reshape(-1, 3).T
    return PointSet(pts, np.array(ids, dtype=int))


def write_mps(path, pointset):
    root = ET.Element("point_set_file")
    ET.SubElement(root, "file_version").text = "0.1"
    pset = ET.SubElement(root, "point_set")
    series = ET.SubElement(pset, "time_series")
    ET.SubElement(series, "time_series_id").text = "0"
    for k in range(pointset.num_points):
        point = ET.SubElement(series, "point")
        ET.SubElement(point, "id").text = str(int(pointset.ids[k]))
        for axis, value in zip("xyz", pointset.points[:, k]):
            ET.SubElement(point, axis).text = repr(float(value))
    ET.ElementTree(root).write(path, xml_declaration=True, encoding="UTF-8")
