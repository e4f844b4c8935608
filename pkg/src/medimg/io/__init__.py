from .gipl import read_gipl, write_gipl
from .itkmatrix import read_itk_matrix, write_itk_matrix
from .mhd import read_mhd, write_mhd
from .mps import PointSet, read_mps, write_mps
from .nifti import read_nifti
from .picture import read_picture
from .pixeltypes import PIXEL_TYPES, cast_from_float64, dtype_for
from .stl import read_stl, write_stl
from .vtkmesh import read_vtk_mesh, write_vtk_mesh

__all__ = [
    "PIXEL_TYPES", "PointSet", "cast_from_float64", "dtype_for",
    "read_gipl", "read_itk_matrix", "read_mhd", "read_mps", "read_nifti",
    "read_picture", "read_stl", "read_vtk_mesh",
    "write_gipl", "write_itk_matrix", "write_mhd", "write_mps",
    "write_stl", "write_vtk_mesh",
]
