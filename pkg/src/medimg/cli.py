"""Command-line frontend: file inspection, conversion, filtering,
registration, mesh generation, and the viewer service launcher."""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import io as formats
from .errors import MedimgError
from .mesh import (
    box_mesh,
    cylinder_mesh,
    ellipsoid_mesh,
    plane_mesh,
    sphere_mesh,
)
from .processing import crop as crop_op
from .processing import gradient as gradient_op
from .processing import resample as resample_op
from .processing import reslice as reslice_op
from .registration import RegistrationProblem, register
from .transforms import ffd_initialize, matrix_to_rigid_params

IMAGE_READERS = {
    ".mhd": formats.read_mhd,
    ".gipl": formats.read_gipl,
    ".nii": formats.read_nifti,
    ".png": formats.read_picture,
    ".jpg": formats.read_picture,
    ".jpeg": formats.read_picture,
    ".bmp": formats.read_picture,
    ".tif": formats.read_picture,
    ".tiff": formats.read_picture,
}
MESH_READERS = {".stl": formats.read_stl, ".vtk": formats.read_vtk_mesh}
MESH_WRITERS = {".stl": formats.write_stl, ".vtk": formats.write_vtk_mesh}


def _fail(message):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _read_image(path):
    ext = os.path.splitext(path)[1].lower()
    reader = IMAGE_READERS.get(ext)
    if reader is None:
        _fail(f"unsupported image format {ext!r}")
    try:
        return reader(path)
    except (MedimgError, OSError) as exc:
        _fail(str(exc))


def _write_image(path, image, element_type="float64"):
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext == ".mhd":
            formats.write_mhd(path, image, element_type=element_type)
        elif ext == ".gipl":
            formats.write_gipl(path, image, element_type=element_type)
        else:
            _fail(f"unsupported output format {ext!r}")
    except (MedimgError, OSError) as exc:
        _fail(str(exc))


def _vector(text, name):
    if text is None:
        return None
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        _fail(f"{name} must be comma-separated numbers")


@click.group()
def main():
    """Medical image toolkit command line."""


@main.command()
@click.argument("path", type=click.Path(exists=True))
def info(path):
    """Print image geometry and value range as JSON."""
    image = _read_image(path)
    click.echo(json.dumps({
        "size": [int(v) for v in image.size],
        "spacing": [float(v) for v in image.spacing],
        "origin": [float(v) for v in image.origin],
        "orientation": image.orientation.tolist(),
        "value_range": [float(image.data.min()), float(image.data.max())],
    }, indent=2))


@main.command()
@click.argument("src", type=click.Path(exists=True))
@click.argument("dst", type=click.Path())
@click.option("--element-type", default="float64",
              help="stored pixel type, e.g. uint8, int16, float32")
def convert(src, dst, element_type):
    """Convert an image between file formats and pixel types."""
    _write_image(dst, _read_image(src), element_type=element_type)


@main.command()
@click.argument("src", type=click.Path(exists=True))
@click.argument("dst", type=click.Path())
@click.option("--spacing", help="new spacing, comma-separated mm")
@click.option("--size", help="new size, comma-separated voxels (with --spacing)")
@click.option("--centre", help="output centre in mm (with --spacing and --size)")
@click.option("--reference", type=click.Path(exists=True),
              help="resample onto this image's grid")
@click.option("--interpolation", default="linear",
              type=click.Choice(["linear", "nearest"]))
@click.option("--blur-neigh", help="Gaussian pre-blur half-widths, voxels")
@click.option("--blur-sigma", help="Gaussian pre-blur sigmas, voxels")
def resample(src, dst, spacing, size, centre, reference, interpolation,
             blur_neigh, blur_sigma):
    """Resample an image to a new grid, optionally pre-blurring."""
    image = _read_image(src)
    blur = None
    if blur_neigh or blur_sigma:
        if not (blur_neigh and blur_sigma):
            _fail("--blur-neigh and --blur-sigma must be given together")
        blur = (_vector(blur_neigh, "--blur-neigh"),
                _vector(blur_sigma, "--blur-sigma"))
    kwargs = {"interpolation": interpolation, "blur": blur}
    sp = _vector(spacing, "--spacing")
    sz = _vector(size, "--size")
    ce = _vector(centre, "--centre")
    try:
        if reference:
            out = resample_op(image, reference=_read_image(reference), **kwargs)
        elif sp is not None and sz is not None and ce is not None:
            out = resample_op(image, spacing_and_size_and_centre=np.concatenate(
                [sp, sz, ce]), **kwargs)
        elif sp is not None and sz is not None:
            out = resample_op(image, spacing_and_size=np.concatenate([sp, sz]),
                              **kwargs)
        elif sp is not None:
            out = resample_op(image, spacing=sp, **kwargs)
        else:
            _fail("give --reference, or --spacing (optionally --size, --centre)")
    except MedimgError as exc:
        _fail(str(exc))
    _write_image(dst, out)


@main.command()
@click.argument("src", type=click.Path(exists=True))
@click.argument("dst", type=click.Path())
@click.option("--bounds", required=True,
              help="world bounds: x0,x1,y0,y1[,z0,z1]")
def crop(src, dst, bounds):
    """Crop an image to world-coordinate bounds."""
    image = _read_image(src)
    try:
        out = crop_op(image, _vector(bounds, "--bounds"))
    except MedimgError as exc:
        _fail(str(exc))
    _write_image(dst, out)


@main.command()
@click.argument("src", type=click.Path(exists=True))
@click.argument("dst", type=click.Path())
@click.option("--frame", help="16 numbers, column-major 4x4 slice frame")
@click.option("--normal", help="plane normal x,y,z")
@click.option("--point", help="plane point x,y,z (mm)")
@click.option("--thickness", default=1, show_default=True,
              help="odd slab thickness in samples")
def reslice(src, dst, frame, normal, point, thickness):
    """Extract an oblique 2D slice from a 3D volume."""
    volume = _read_image(src)
    frame_matrix = None
    if frame:
        frame_matrix = _vector(frame, "--frame").reshape(4, 4, order="F")
    try:
        _, slice2d = reslice_op(volume, frame=frame_matrix,
                                normal=_vector(normal, "--normal"),
                                point=_vector(point, "--point"),
                                thickness=thickness)
    except MedimgError as exc:
        _fail(str(exc))
    _write_image(dst, slice2d)


@main.command()
@click.argument("src", type=click.Path(exists=True))
@click.argument("dst_pattern")
@click.option("--order", default=1, show_default=True)
@click.option("--sigma", help="Gaussian sigma per axis, voxels")
def gradient(src, dst_pattern, order, sigma):
    """Write per-axis Gaussian-derivative images.

    DST_PATTERN must contain '{axis}', replaced by the axis index (1-based).
    """
    if "{axis}" not in dst_pattern:
        _fail("destination pattern must contain '{axis}'")
    image = _read_image(src)
    try:
        components = gradient_op(image, order=order,
                                 sigma=_vector(sigma, "--sigma"))
    except MedimgError as exc:
        _fail(str(exc))
    for k, component in enumerate(components):
        _write_image(dst_pattern.replace("{axis}", str(k + 1)), component)


@main.command()
@click.argument("src", type=click.Path(exists=True))
@click.argument("dst", type=click.Path())
@click.option("--neigh", required=True, help="kernel half-widths, voxels")
@click.option("--sigma", required=True, help="Gaussian sigmas, voxels")
def blur(src, dst, neigh, sigma):
    """Gaussian-blur an image on its own grid."""
    image = _read_image(src)
    try:
        out = resample_op(image, reference=image,
                          blur=(_vector(neigh, "--neigh"),
                                _vector(sigma, "--sigma")))
    except MedimgError as exc:
        _fail(str(exc))
    _write_image(dst, out)


def _run_registration(fixed, moving, transform, metric, optimizer, x0,
                      max_iter, ffd_state=None):
    options = {} if max_iter is None else {"max_iter": max_iter}
    try:
        problem = RegistrationProblem(
            fixed=fixed, moving=moving, transform=transform, metric=metric,
            optimizer=optimizer, x0=x0, ffd_state=ffd_state, options=options)
        return register(problem)
    except MedimgError as exc:
        _fail(str(exc))


@main.command("register-rigid")
@click.option("--fixed", required=True, type=click.Path(exists=True))
@click.option("--moving", required=True, type=click.Path(exists=True))
@click.option("--metric", default="ncc", type=click.Choice(["ncc", "nmi", "ssd"]))
@click.option("--optimizer", default="lbfgs", type=click.Choice(["lbfgs", "cg"]))
@click.option("--x0", help="initial parameters, comma-separated")
@click.option("--max-iter", type=int, default=None)
@click.option("--out", required=True, type=click.Path(),
              help="output transform matrix file")
@click.option("--warped", type=click.Path(), help="output warped moving image")
def register_rigid(fixed, moving, metric, optimizer, x0, max_iter, out, warped):
    """Rigid intensity registration; writes the recovered matrix."""
    fixed_im = _read_image(fixed)
    moving_im = _read_image(moving)
    result = _run_registration(fixed_im, moving_im, "rigid", metric, optimizer,
                               _vector(x0, "--x0"), max_iter)
    matrix = result.matrix
    if matrix.shape == (3, 3):  # embed a 2D transform in the 4x4 file format
        lifted = np.eye(4)
        lifted[:2, :2] = matrix[:2, :2]
        lifted[:2, 3] = matrix[:2, 2]
        matrix = lifted
    formats.write_itk_matrix(out, matrix)
    if warped:
        _write_image(warped, result.warped)
    click.echo(json.dumps({
        "params": [float(v) for v in result.params],
        "cost_initial": result.cost_initial,
        "cost_final": result.cost_final,
        "iterations": result.iterations,
    }))


@main.command("register-ffd")
@click.option("--fixed", required=True, type=click.Path(exists=True))
@click.option("--moving", required=True, type=click.Path(exists=True))
@click.option("--metric", default="ncc", type=click.Choice(["ncc", "nmi", "ssd"]))
@click.option("--optimizer", default="lbfgs", type=click.Choice(["lbfgs", "cg"]))
@click.option("--grid-spacing", required=True,
              help="control-grid spacing per axis, mm")
@click.option("--degree", default=1, show_default=True)
@click.option("--levels", default=1, show_default=True)
@click.option("--x0", help="initial parameters, comma-separated")
@click.option("--max-iter", type=int, default=None)
@click.option("--out", required=True, type=click.Path(),
              help="output parameter file (one value per line)")
@click.option("--warped", type=click.Path(), help="output warped moving image")
def register_ffd(fixed, moving, metric, optimizer, grid_spacing, degree,
                 levels, x0, max_iter, out, warped):
    """B-spline free-form-deformation registration; writes the parameters."""
    fixed_im = _read_image(fixed)
    moving_im = _read_image(moving)
    try:
        state = ffd_initialize(fixed_im, degree=degree, levels=levels,
                               grid_spacing=_vector(grid_spacing,
                                                    "--grid-spacing"))
    except MedimgError as exc:
        _fail(str(exc))
    result = _run_registration(fixed_im, moving_im, "ffd", metric, optimizer,
                               _vector(x0, "--x0"), max_iter, ffd_state=state)
    np.savetxt(out, result.params)
    if warped:
        _write_image(warped, result.warped)
    click.echo(json.dumps({
        "num_params": int(result.params.size),
        "cost_initial": result.cost_initial,
        "cost_final": result.cost_final,
        "iterations": result.iterations,
    }))


@main.command("mesh-source")
@click.argument("kind", type=click.Choice(
    ["sphere", "box", "cylinder", "ellipsoid", "plane"]))
@click.argument("dst", type=click.Path())
@click.option("--center", default="0,0,0", show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--radii", default="1,1,1", show_default=True)
@click.option("--dims", default="1,1,1", show_default=True)
@click.option("--axis", default="0,0,1", show_default=True)
@click.option("--height", type=float, default=1.0, show_default=True)
@click.option("--normal", default="0,0,1", show_default=True)
@click.option("--scale", type=float, default=1.0, show_default=True)
@click.option("--resolution", type=int, default=16, show_default=True)
def mesh_source(kind, dst, center, radius, radii, dims, axis, height, normal,
                scale, resolution):
    """Generate a parametric triangle mesh and write it to STL or VTK."""
    c = _vector(center, "--center")
    try:
        if kind == "sphere":
            mesh = sphere_mesh(c, radius, resolution=resolution)
        elif kind == "box":
            mesh = box_mesh(c, _vector(dims, "--dims"))
        elif kind == "cylinder":
            mesh = cylinder_mesh(_vector(axis, "--axis"), c, radius, height,
                                 resolution=resolution)
        elif kind == "ellipsoid":
            mesh = ellipsoid_mesh(c, _vector(radii, "--radii"),
                                  resolution=resolution)
        else:
            mesh = plane_mesh(c, _vector(normal, "--normal"), scale=scale)
    except MedimgError as exc:
        _fail(str(exc))
    ext = os.path.splitext(dst)[1].lower()
    writer = MESH_WRITERS.get(ext)
    if writer is None:
        _fail(f"unsupported mesh format {ext!r}")
    writer(dst, mesh)


@main.command()
@click.option("--port", default=8000, show_default=True,
              help="port (env MEDIMG_PORT overrides)")
@click.option("--data-dir", type=click.Path(), default=None,
              help="directory for uploaded files")
def serve(port, data_dir):
    """Start the slice-rendering HTTP service."""
    from .service import run_server

    run_server(port=port, data_dir=data_dir)


if __name__ == "__main__":
    main()
