"""HTTP slice-rendering and registration service.

Exposes image loading, oblique slice rendering (PNG), manual mask creation
and intensity registration over HTTP/1.1 + JSON for the browser viewer.
Images are immutable once stored; derived results get fresh ids, so renders
always work on consistent snapshots.
"""

from __future__ import annotations

import base64
import io as _io
import json
import os
import tempfile
import threading
import zipfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response

from . import io as formats
from .errors import (
    DegenerateMetricError,
    GeometryMismatchError,
    InvalidArgumentError,
    InvalidGeometryError,
    MedimgError,
    ParseError,
    TruncatedDataError,
    UnsupportedTypeError,
)
from .frame import canonicalize_frame, plane_frame
from .image import Image
from .processing import rasterize_ellipse, rasterize_polygon, reslice
from .registration import RegistrationProblem, register
from .transforms import transform_rigid

READERS = {
    ".mhd": formats.read_mhd,
    ".gipl": formats.read_gipl,
    ".nii": formats.read_nifti,
}
PICTURE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
COLORMAPS = ("gray", "hot")


def _error(status, code, message):
    return HTTPException(status_code=status,
                         detail={"code": code, "message": message})


@dataclass
class _Entry:
    image: Image
    window: float
    level: float
    colormap: str = "gray"


class SessionStore:
    """Thread-safe id -> image map; entries are write-once."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries = {}
        self._counter = 0

    def add(self, image, colormap="gray"):
        lo, hi = float(image.data.min()), float(image.data.max())
        window = (hi - lo) or 1.0
        level = (hi + lo) / 2
        with self._lock:
            self._counter += 1
            image_id = f"img-{self._counter}"
            self._entries[image_id] = _Entry(image, window, level, colormap)
        return image_id

    def get(self, image_id):
        with self._lock:
            entry = self._entries.get(image_id)
        if entry is None:
            raise _error(404, "unknown-id", f"no image with id {image_id!r}")
        return entry


def _read_image_file(path):
    ext = os.path.splitext(path)[1].lower()
    if ext in PICTURE_EXTENSIONS:
        reader = formats.read_picture
    elif ext in READERS:
        reader = READERS[ext]
    else:
        raise _error(415, "unknown-format", f"unsupported extension {ext!r}")
    try:
        return reader(path)
    except UnsupportedTypeError as exc:
        raise _error(415, "unsupported-format", str(exc))
    except (ParseError, TruncatedDataError, MedimgError, OSError) as exc:
        raise _error(400, "decode-error", str(exc))


def _metadata(image_id, image):
    frames = int(image.size[3]) if image.ndim == 4 else 1
    return {
        "id": image_id,
        "size": [int(v) for v in image.size],
        "spacing": [float(v) for v in image.spacing],
        "origin": [float(v) for v in image.origin],
        "orientation": image.orientation.tolist(),
        "value_range": [float(image.data.min()), float(image.data.max())],
        "frames": frames,
    }


def _parse_floats(text, n, what):
    try:
        values = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise _error(400, "bad-parameter", f"{what} must be comma-separated numbers")
    if values.size != n:
        raise _error(400, "bad-parameter", f"{what} needs {n} values, got {values.size}")
    return values


def _parse_frame_spec(frame=None, normal=None, point=None):
    """Build a canonical 4x4 slice frame from query parameters."""
    try:
        if frame is not None:
            values = _parse_floats(frame, 16, "frame")
            return canonicalize_frame(values.reshape(4, 4, order="F"))
        if normal is not None or point is not None:
            if normal is None or point is None:
                raise _error(400, "bad-parameter",
                             "normal and point must be given together")
            return plane_frame(_parse_floats(normal, 3, "normal"),
                               _parse_floats(point, 3, "point"))
    except (InvalidArgumentError, InvalidGeometryError) as exc:
        raise _error(400, "invalid-frame", str(exc))
    return None


def _window_map(data, window, level):
    """Window/level mapping to [0, 1]: clamp((v - (level - window/2)) / window)."""
    if window <= 0:
        raise _error(400, "bad-parameter", "window must be positive")
    return np.clip((data - (level - window / 2)) / window, 0.0, 1.0)


def _apply_colormap(t, name):
    """(w, h) values in [0, 1] -> (w, h, 3) uint8."""
    if name == "gray":
        rgb = np.stack([t, t, t], axis=-1)
    elif name == "hot":
        rgb = np.stack([np.clip(3 * t, 0, 1),
                        np.clip(3 * t - 1, 0, 1),
                        np.clip(3 * t - 2, 0, 1)], axis=-1)
    else:
        raise _error(400, "bad-parameter",
                     f"colormap must be one of {COLORMAPS}")
    return rgb


def _to_png(rgb):
    """(w, h, 3) floats in [0, 1] -> deterministic PNG bytes."""
    from PIL import Image as PilImage

    data = np.floor(np.clip(rgb, 0, 1) * 255 + 0.5).astype(np.uint8)
    pil = PilImage.fromarray(np.transpose(data, (1, 0, 2)), mode="RGB")
    buf = _io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def _slice_images(image, frame, thickness):
    """Slice grid for rendering/masking: (3D oriented slab or None, 2D image)."""
    if image.ndim == 2:
        return None, image
    if frame is None:
        frame = np.eye(4)
        frame[:3, 3] = image.geometric_centre()
    try:
        return reslice(image, frame=frame, thickness=thickness)
    except (InvalidArgumentError, InvalidGeometryError) as exc:
        raise _error(400, "invalid-frame", str(exc))


def create_app(data_dir=None):
    app = FastAPI(title="medimg viewer service")
    store = SessionStore()
    data_dir = data_dir or tempfile.mkdtemp(prefix="medimg-service-")
    os.makedirs(data_dir, exist_ok=True)

    @app.exception_handler(MedimgError)
    async def _medimg_error(request, exc):
        return JSONResponse(status_code=422, content={
            "detail": {"code": "processing-error", "message": str(exc)}})

    @app.post("/images")
    async def post_images(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                raise _error(400, "bad-request", "multipart body needs a 'file' field")
            path = os.path.join(data_dir, os.path.basename(upload.filename))
            with open(path, "wb") as fh:
                fh.write(await upload.read())
        else:
            try:
                body = await request.json()
            except json.JSONDecodeError:
                raise _error(400, "bad-request", "body must be JSON or multipart")
            if "path" in body:
                path = body["path"]
                if not os.path.isfile(path):
                    raise _error(400, "missing-file", f"no file at {path!r}")
            elif "filename" in body and "content_base64" in body:
                path = os.path.join(data_dir, os.path.basename(body["filename"]))
                with open(path, "wb") as fh:
                    fh.write(base64.b64decode(body["content_base64"]))
                for name, payload in body.get("extra_files", {}).items():
                    extra = os.path.join(data_dir, os.path.basename(name))
                    with open(extra, "wb") as fh:
                        fh.write(base64.b64decode(payload))
            else:
                raise _error(400, "bad-request",
                             "body needs 'path' or 'filename' + 'content_base64'")
        image = _read_image_file(path)
        image_id = store.add(image)
        return _metadata(image_id, image)

    @app.get("/images/{image_id}")
    async def get_image(image_id: str):
        entry = store.get(image_id)
        return _metadata(image_id, entry.image)

    @app.get("/images/{image_id}/slice")
    async def get_slice(image_id: str,
                        frame: Optional[str] = None,
                        normal: Optional[str] = None,
                        point: Optional[str] = None,
                        frame_index: int = 1,
                        window: Optional[float] = None,
                        level: Optional[float] = None,
                        colormap: Optional[str] = None,
                        thickness: int = 1,
                        overlay: Optional[str] = None,
                        overlay_pose: Optional[str] = None,
                        overlay_colormap: str = "hot",
                        overlay_opacity: float = 0.5):
        entry = store.get(image_id)
        image = entry.image
        if image.ndim == 4:
            try:
                image = image.extract_frame(frame_index)
            except MedimgError as exc:
                raise _error(400, "bad-parameter", str(exc))
        frame_matrix = _parse_frame_spec(frame, normal, point)
        slice3d, slice2d = _slice_images(image, frame_matrix, thickness)

        window = entry.window if window is None else window
        level = entry.level if level is None else level
        t = _window_map(slice2d.data, window, level)
        rgb = _apply_colormap(t, colormap or entry.colormap)

        if overlay is not None:
            if not 0.0 <= overlay_opacity <= 1.0:
                raise _error(400, "bad-parameter", "overlay_opacity must be in [0, 1]")
            over_entry = store.get(overlay)
            over = over_entry.image
            n_pose = 3 if over.ndim == 2 else 6
            pose = np.zeros(n_pose) if overlay_pose is None else \
                _parse_floats(overlay_pose, n_pose, "overlay_pose")
            ref = slice2d if slice3d is None else slice3d
            if over.ndim != ref.ndim:
                raise _error(400, "bad-parameter",
                             "overlay dimensionality does not match the slice")
            warped = transform_rigid(over, pose, ref=ref)
            warped2d = warped if warped.ndim == 2 else warped.force_2d()
            t_over = _window_map(warped2d.data, over_entry.window,
                                 over_entry.level)
            rgb_over = _apply_colormap(t_over, overlay_colormap)
            rgb = rgb + overlay_opacity * (rgb_over - rgb)

        headers = {
            "X-Pixel-Spacing": " ".join(repr(float(v)) for v in slice2d.spacing),
            "X-Slice-Size": " ".join(str(int(v)) for v in slice2d.size),
        }
        return Response(content=_to_png(rgb), media_type="image/png",
                        headers=headers)

    @app.get("/images/{image_id}/frame-matrix")
    async def get_frame_matrix(image_id: str,
                               frame: Optional[str] = None,
                               normal: Optional[str] = None,
                               point: Optional[str] = None):
        store.get(image_id)
        matrix = _parse_frame_spec(frame, normal, point)
        if matrix is None:
            matrix = np.eye(4)
        return {"matrix": matrix.tolist()}

    @app.post("/images/{image_id}/mask")
    async def post_mask(image_id: str, request: Request):
        entry = store.get(image_id)
        body = await request.json()
        frame_values = body.get("frame")
        frame_matrix = None
        if frame_values is not None:
            frame_matrix = _parse_frame_spec(
                ",".join(str(v) for v in np.ravel(frame_values)))
        _, slice2d = _slice_images(entry.image, frame_matrix,
                                   body.get("thickness", 1))
        try:
            if "polygon" in body:
                vertices = np.asarray(body["polygon"], dtype=float)
                if vertices.ndim != 2 or vertices.shape[0] < 3 \
                        or vertices.shape[1] != 2:
                    raise _error(400, "bad-shape",
                                 "polygon needs >= 3 [x, y] vertices")
                mask = rasterize_polygon(slice2d, vertices.T)
            elif "ellipse" in body:
                ellipse = body["ellipse"]
                mask = rasterize_ellipse(slice2d,
                                         np.asarray(ellipse["center"], dtype=float),
                                         np.asarray(ellipse["radii"], dtype=float),
                                         float(ellipse.get("angle", 0.0)))
            else:
                raise _error(400, "bad-request",
                             "body needs 'polygon' or 'ellipse'")
        except InvalidArgumentError as exc:
            raise _error(400, "bad-shape", str(exc))
        mask_id = store.add(mask)
        return {"mask_id": mask_id, "sum": float(mask.data.sum())}

    @app.get("/images/{image_id}/export")
    async def export_image(image_id: str, format: str = "mhd"):
        entry = store.get(image_id)
        if format != "mhd":
            raise _error(415, "unknown-format",
                         f"export format {format!r} not supported")
        with tempfile.TemporaryDirectory() as tmp:
            base = os.path.join(tmp, image_id)
            formats.write_mhd(base + ".mhd", entry.image)
            buf = _io.BytesIO()
            with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
                for ext in (".mhd", ".raw"):
                    with open(base + ext, "rb") as fh:
                        info = zipfile.ZipInfo(image_id + ext)
                        zf.writestr(info, fh.read())
        return Response(content=buf.getvalue(), media_type="application/zip")

    @app.post("/register")
    async def post_register(request: Request):
        body = await request.json()
        for key in ("fixed_id", "moving_id"):
            if key not in body:
                raise _error(400, "bad-request", f"body needs {key!r}")
        fixed = store.get(body["fixed_id"]).image
        moving = store.get(body["moving_id"]).image
        options = dict(body.get("options", {}))
        x0 = body.get("x0")
        try:
            problem = RegistrationProblem(
                fixed=fixed, moving=moving,
                transform=body.get("transform", "rigid"),
                metric=body.get("metric", "ncc"),
                optimizer=body.get("optimizer", "lbfgs"),
                x0=None if x0 is None else np.asarray(x0, dtype=float),
                bins=int(body.get("bins", 64)),
                options=options)
            result = register(problem)
        except (GeometryMismatchError, DegenerateMetricError,
                InvalidArgumentError) as exc:
            raise _error(422, "registration-error", str(exc))
        warped_id = store.add(result.warped)
        return {
            "params": [float(v) for v in result.params],
            "matrix": None if result.matrix is None else result.matrix.tolist(),
            "cost_initial": result.cost_initial,
            "cost_final": result.cost_final,
            "iterations": result.iterations,
            "warped_id": warped_id,
        }

    return app


def run_server(port=8000, data_dir=None):
    import uvicorn

    port = int(os.environ.get("MEDIMG_PORT", port))
    uvicorn.run(create_app(data_dir=data_dir), host="127.0.0.1", port=port)
