"""Acceptance gate: one test per top-level acceptance criterion.

Each test prints a single PASS line on success; any failure is a normal
pytest assertion failure for that criterion.
"""

import os
import time

import numpy as np
import pytest
from scipy import ndimage

from medimg import (
    Image,
    MetricContext,
    ObjectiveSpec,
    RansacSpec,
    RegistrationProblem,
    box_mesh,
    cg_minimize,
    crop,
    cylinder_mesh,
    ellipsoid_mesh,
    ffd_initialize,
    gradient,
    lbfgs_minimize,
    ncc_cost,
    nmi_cost,
    ransac,
    register,
    resample,
    reslice,
    sphere_mesh,
    ssd_cost,
    transform_ffd,
    transform_rigid,
)
from medimg.io import (
    PointSet,
    read_gipl,
    read_itk_matrix,
    read_mhd,
    read_mps,
    read_nifti,
    read_stl,
    read_vtk_mesh,
    write_gipl,
    write_itk_matrix,
    write_mhd,
    write_mps,
    write_stl,
    write_vtk_mesh,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _report(line):
    print(f"ACCEPTANCE PASS: {line}")


def _structured_image(shape, seed=0):
    """Smooth texture + off-centre blob, tapered to zero at the borders."""
    rng = np.random.default_rng(seed)
    im = Image.zeros(shape)
    im.data[:] = ndimage.gaussian_filter(rng.normal(size=shape), 5) * 100
    yy, xx = np.meshgrid(np.arange(shape[1]), np.arange(shape[0]))
    im.data += 90 * np.exp(-(((xx - shape[0] * 0.32) / 12) ** 2
                             + ((yy - shape[1] * 0.58) / 12) ** 2))
    for axis_len, coord in zip(shape, (xx, yy)):
        u = coord / (axis_len - 1)
        im.data *= np.clip(np.minimum(u, 1 - u) / 0.2, 0, 1) ** 2
    return im


def test_rigid_recovery_15_degrees():
    """128x128 image rotated by 15 deg; NCC + L-BFGS from zero recovers the
    rotation within 1% relative (<= 0.15 deg) and translation <= 0.5 mm,
    in <= 60 s."""
    start = time.time()
    fixed = _structured_image((128, 128))
    theta = np.deg2rad(15.0)
    moving = transform_rigid(fixed, (0.0, 0.0, theta), ref=fixed)
    problem = RegistrationProblem(fixed=fixed, moving=moving, transform="rigid",
                                  metric="ncc", optimizer="lbfgs")
    result = register(problem)
    elapsed = time.time() - start
    recovered_deg = np.rad2deg(result.params[2])
    angle_err = abs(recovered_deg - (-15.0))
    translation = np.linalg.norm(result.params[:2])
    assert angle_err <= 0.15, f"angle error {angle_err:.4f} deg > 0.15"
    assert translation <= 0.5, f"translation {translation:.4f} mm > 0.5"
    assert elapsed <= 60, f"runtime {elapsed:.1f} s > 60"
    _report(f"rigid recovery: {recovered_deg:.3f} deg (err {angle_err:.4f}), "
            f"|t| = {translation:.4f} mm, {elapsed:.1f} s")


def test_ffd_recovery_property():
    """128x128 image warped by a known degree-1 FFD (10 mm grid, sigma = 2 mm
    control displacements); registering back reduces the cost and cuts the
    mean absolute intensity difference by >= 60%, in <= 5 min."""
    start = time.time()
    fixed = _structured_image((128, 128), seed=1)
    state = ffd_initialize(fixed, degree=1, levels=1, grid_spacing=(10, 10))
    rng = np.random.default_rng(2)
    true_params = rng.normal(size=state.num_params) * 2.0
    moving = transform_ffd(fixed, true_params, state)
    mad_before = float(np.mean(np.abs(fixed.data - moving.data)))
    problem = RegistrationProblem(fixed=fixed, moving=moving, transform="ffd",
                                  ffd_state=state, metric="ncc",
                                  optimizer="lbfgs",
                                  options={"max_iter": 15})
    result = register(problem)
    elapsed = time.time() - start
    mad_after = float(np.mean(np.abs(fixed.data - result.warped.data)))
    reduction = 1 - mad_after / mad_before
    assert result.cost_final < result.cost_initial
    assert reduction >= 0.60, f"MAD reduction {reduction:.2%} < 60%"
    assert elapsed <= 300, f"runtime {elapsed:.1f} s > 300"
    _report(f"ffd recovery: MAD {mad_before:.3f} -> {mad_after:.3f} "
            f"({reduction:.1%} reduction), {elapsed:.1f} s")


def test_io_round_trips(tmp_path):
    """Codec round-trips at stated precisions plus reference fixtures."""
    rng = np.random.default_rng(3)
    im = Image.zeros((7, 6, 5), (0.5, -1.0, 2.0), (0.8, 1.1, 1.4))
    im.data[:] = rng.normal(size=(7, 6, 5)) * 50

    # MHD float64: bit-exact data, exact geometry
    write_mhd(str(tmp_path / "a.mhd"), im)
    back = read_mhd(str(tmp_path / "a.mhd"))
    assert np.array_equal(back.data, im.data)
    assert np.array_equal(back.origin, im.origin)
    assert np.array_equal(back.spacing, im.spacing)

    # MHD uint8 cast rule: round half away from zero, clamp to [0, 255]
    write_mhd(str(tmp_path / "b.mhd"), im, element_type="uint8")
    back8 = read_mhd(str(tmp_path / "b.mhd"))
    expected = np.clip(np.sign(im.data) * np.floor(np.abs(im.data) + 0.5),
                       0, 255)
    assert np.array_equal(back8.data, expected)

    # GIPL
    write_gipl(str(tmp_path / "c.gipl"), im)
    backg = read_gipl(str(tmp_path / "c.gipl"))
    assert np.array_equal(backg.data, im.data)
    assert np.max(np.abs(backg.spacing - im.spacing)) < 1e-6  # 32-bit header

    # STL (32-bit float storage)
    sphere = sphere_mesh((1, 2, 3), 2.0)
    write_stl(str(tmp_path / "d.stl"), sphere)
    backs = read_stl(str(tmp_path / "d.stl"))
    assert backs.triangles.shape == sphere.triangles.shape
    assert np.max(np.abs(backs.points - sphere.points)) < 1e-5

    # legacy VTK polydata (exact ASCII round-trip of modest precision data)
    write_vtk_mesh(str(tmp_path / "e.vtk"), sphere)
    backv = read_vtk_mesh(str(tmp_path / "e.vtk"))
    assert np.max(np.abs(backv.points - sphere.points)) < 1e-6
    assert np.array_equal(backv.triangles, sphere.triangles)

    # MPS point set
    ps = PointSet(points=np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).T,
                  ids=[0, 7])
    write_mps(str(tmp_path / "f.mps"), ps)
    backp = read_mps(str(tmp_path / "f.mps"))
    assert np.max(np.abs(backp.points - ps.points)) < 1e-12

    # ITK matrix text
    matrix = np.eye(4)
    matrix[:3, 3] = (1.5, -2.5, 3.25)
    write_itk_matrix(str(tmp_path / "g.mat"), matrix)
    assert np.array_equal(read_itk_matrix(str(tmp_path / "g.mat")), matrix)

    # reference-tool fixtures decode to expected metadata
    fixture = read_mhd(os.path.join(FIXTURES, "reference.mhd"))
    assert np.array_equal(fixture.size, (4, 3, 2))
    assert np.allclose(fixture.spacing, (0.5, 0.75, 1.25))
    assert np.allclose(fixture.origin, (-1.5, 2.25, 0.5))
    assert np.array_equal(fixture.data.ravel(order="F"), np.arange(24))
    fixg = read_gipl(os.path.join(FIXTURES, "reference.gipl"))
    assert np.array_equal(fixg.size, (4, 3, 2))
    fixn = read_nifti(os.path.join(FIXTURES, "reference_identity.nii"))
    assert np.array_equal(fixn.size, (4, 3, 2))
    _report("io round-trips: mhd/gipl/stl/vtk/mps/itk-matrix + fixtures")


def test_interpolation_oracle():
    """Linear get_value at 1000 random positions matches a brute-force
    multilinear oracle within 1e-9."""
    rng = np.random.default_rng(4)
    im = Image.zeros((9, 8, 7), (1.0, -2.0, 0.5), (0.9, 1.2, 0.7))
    im.data[:] = rng.normal(size=(9, 8, 7)) * 10
    positions = np.stack([
        rng.uniform(-1, 10 * 0.9 + 1, 1000),
        rng.uniform(-3, 8 * 1.2 - 1, 1000),
        rng.uniform(0, 7 * 0.7 + 1, 1000)])
    got = im.get_value(positions, mode="linear")
    worst = 0.0
    for j in range(1000):
        ci = im.world_to_continuous_index(positions[:, j:j + 1]).ravel()
        if np.any(ci < 1) or np.any(ci > im.size):
            expected = im.padding_value
        else:
            base = np.minimum(np.floor(ci).astype(int), im.size - 1)
            base = np.maximum(base, 1)
            frac = ci - base
            expected = 0.0
            for corner in range(8):
                w, idx = 1.0, []
                for k in range(3):
                    bit = corner >> k & 1
                    idx.append(min(base[k] + bit, im.size[k]))
                    w *= frac[k] if bit else 1 - frac[k]
                expected += w * im.data[idx[0] - 1, idx[1] - 1, idx[2] - 1]
        worst = max(worst, abs(got[j] - expected))
    assert worst <= 1e-9, f"worst interpolation error {worst:.2e}"
    _report(f"interpolation oracle: worst |err| = {worst:.2e} <= 1e-9")


def test_geometry_algebra():
    """Index/world round-trip <= 1e-10 under random orthonormal orientations;
    resample-to-self <= 1e-12; axis-aligned reslice is exact."""
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        im = Image.zeros((6, 5, 4), rng.normal(size=3) * 10,
                         rng.uniform(0.5, 2, 3), q)
        idx = np.stack([rng.uniform(1, s, 50) for s in im.size])
        back = im.world_to_continuous_index(im.index_to_world(idx))
        worst = max(worst, float(np.max(np.abs(back - idx))))
    assert worst <= 1e-10

    src = Image.zeros((20, 18))
    src.data[:] = rng.normal(size=(20, 18))
    self_err = float(np.max(np.abs(
        resample(src, reference=src).data - src.data)))
    assert self_err <= 1e-12

    vol = Image.zeros((9, 8, 7))
    vol.data[:] = rng.normal(size=(9, 8, 7))
    frame = np.eye(4)
    frame[:3, 3] = vol.geometric_centre()
    _, sl = reslice(vol, frame=frame)
    assert np.array_equal(sl.data, vol.data[:, :, 3])
    _report(f"geometry algebra: round-trip {worst:.2e}, "
            f"self-resample {self_err:.2e}, axis-aligned reslice exact")


def test_metric_oracles():
    """SSD/NCC/NMI match brute-force oracles within 1e-12 and satisfy their
    self/invariance identities."""
    rng = np.random.default_rng(6)
    f = Image.zeros((16, 16))
    m = Image.zeros((16, 16))
    f.data[:] = rng.normal(size=(16, 16))
    m.data[:] = rng.normal(size=(16, 16))
    ctx = MetricContext(f, m, lambda mov, p: mov)

    ssd_oracle = float(np.mean((f.data - m.data) ** 2))
    assert abs(ssd_cost(ctx, None) - ssd_oracle) <= 1e-12

    fc = f.data - f.data.mean()
    mc = m.data - m.data.mean()
    ncc_oracle = 1 - float(
        (fc * mc).sum() / np.sqrt((fc ** 2).sum() * (mc ** 2).sum()))
    assert abs(ncc_cost(ctx, None) - ncc_oracle) <= 1e-12

    bins = 64
    joint = np.zeros((bins, bins))
    for a, b in zip(f.data.ravel(), m.data.ravel()):
        ba = min(int((a - f.data.min()) / np.ptp(f.data) * bins), bins - 1)
        bb = min(int((b - m.data.min()) / np.ptp(m.data) * bins), bins - 1)
        joint[ba, bb] += 1
    p = joint / joint.sum()

    def entropy(q):
        q = q[q > 0]
        return -(q * np.log(q)).sum()

    nmi_oracle = 2 - (entropy(p.sum(1)) + entropy(p.sum(0))) / entropy(p.ravel())
    assert abs(nmi_cost(ctx, None) - nmi_oracle) <= 1e-12

    self_ctx = MetricContext(f, f, lambda mov, p: mov)
    assert ssd_cost(self_ctx, None) == 0
    assert abs(ncc_cost(self_ctx, None)) <= 1e-12
    scaled = Image.like(f, data=2.0 * f.data + 3.0)
    assert abs(ncc_cost(MetricContext(f, scaled, lambda mov, p: mov),
                        None)) <= 1e-12
    two_level = Image.zeros((16, 16))
    two_level.data[:8] = 10
    assert abs(nmi_cost(MetricContext(two_level, two_level,
                                      lambda mov, p: mov), None)) <= 1e-9
    _report("metric oracles: ssd/ncc/nmi within 1e-12 of brute force")


def test_optimizer_suite():
    """Rosenbrock, FD gradients, CG/L-BFGS agreement, RANSAC line fit."""
    rosen = lambda x: 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2
    rosen_grad = lambda x: np.array([
        -400 * x[0] * (x[1] - x[0] ** 2) - 2 * (1 - x[0]),
        200 * (x[1] - x[0] ** 2)])
    res = lbfgs_minimize(ObjectiveSpec(f=rosen, grad=rosen_grad, max_iter=500),
                         np.array([-1.2, 1.0]))
    assert np.max(np.abs(res.x - 1)) <= 1e-4 and res.iterations <= 500

    rng = np.random.default_rng(7)
    for _ in range(10):
        a = rng.normal(size=(4, 4))
        h = a @ a.T + 4 * np.eye(4)
        c = rng.normal(size=4)
        quad = lambda x: 0.5 * float(x @ h @ x) - float(c @ x)
        quad_grad = lambda x: h @ x - c
        x = rng.normal(size=4)
        fd = ObjectiveSpec(f=quad).gradient(x)
        an = quad_grad(x)
        assert np.max(np.abs(fd - an) / np.maximum(np.abs(an), 1)) <= 1e-4
        x0 = rng.normal(size=4)
        tight = {"tol_f": 1e-16, "tol_x": 1e-12}
        ra = lbfgs_minimize(ObjectiveSpec(f=quad, grad=quad_grad, **tight), x0)
        rb = cg_minimize(ObjectiveSpec(f=quad, grad=quad_grad, **tight), x0)
        assert np.max(np.abs(ra.x - rb.x)) <= 1e-5

    def line_fit(data):
        return np.array(np.polyfit(data[:, 0], data[:, 1], 1))

    def line_dist(model, data):
        return np.abs(data[:, 1] - (model[0] * data[:, 0] + model[1]))

    successes = 0
    for seed in range(20):
        srng = np.random.default_rng(1000 + seed)
        x = srng.uniform(0, 10, 200)
        y = 2 * x + 1 + srng.normal(0, 0.02, 200)
        out_idx = srng.choice(200, 60, replace=False)
        y[out_idx] = srng.uniform(-10, 30, 60)
        model, _ = ransac(np.stack([x, y], axis=1),
                          RansacSpec(fit=line_fit, distance=line_dist,
                                     min_samples=2, threshold=0.1,
                                     max_iterations=200, seed=seed))
        if abs(model[0] - 2) < 0.05 and abs(model[1] - 1) < 0.05:
            successes += 1
    assert successes >= 19, f"RANSAC succeeded on {successes}/20 seeds"
    _report(f"optimizer suite: Rosenbrock in {res.iterations} iters, "
            f"RANSAC {successes}/20 seeds")


def test_mesh_suite():
    """Sphere/ellipsoid accuracy, closed-surface topology, box counts."""
    sphere = sphere_mesh((1, -2, 3), 2.5)
    radii = np.linalg.norm(sphere.points - np.array([[1, -2, 3]]).T, axis=0)
    assert np.max(np.abs(radii - 2.5)) <= 1e-9

    ellipsoid = ellipsoid_mesh((0, 0, 0), (3, 2, 1))
    rel = ellipsoid.points / np.array([[3], [2], [1]])
    residual = np.abs((rel ** 2).sum(axis=0) - 1)
    assert np.max(residual) <= 1e-9

    closed = [sphere, ellipsoid, box_mesh((0, 0, 0), (1, 2, 3)),
              cylinder_mesh((0, 0, 1), (0, 0, 0), 1.0, 2.0)]
    for mesh in closed:
        assert mesh.euler_characteristic() == 2
        edges, counts = np.unique(np.sort(mesh.edges(), axis=0), axis=1,
                                  return_counts=True)
        assert np.all(counts == 2)  # every edge shared by exactly two faces

    box = box_mesh((0, 0, 0), (1, 1, 1))
    assert box.points.shape[1] == 8 and box.triangles.shape[1] == 12
    _report("mesh suite: sphere 1e-9, ellipsoid 1e-9, "
            "closed surfaces 2-manifold with Euler characteristic 2")


def test_chunking_invariance():
    """resample/blur/gradient results are bitwise identical for
    max_chunk_size in {1e3, 1e5, 1e7}."""
    rng = np.random.default_rng(8)
    base = Image.zeros((40, 38))
    base.data[:] = rng.normal(size=(40, 38))
    outputs = {"resample": [], "blur": [], "gradient": []}
    for chunk in (1_000, 100_000, 10_000_000):
        im = base.copy()
        im.max_chunk_size = int(chunk)
        outputs["resample"].append(
            resample(im, spacing_and_size=(0.7, 0.7, 55, 55)).data)
        outputs["blur"].append(
            resample(im, reference=im, blur=((4, 4), (2, 2))).data)
        outputs["gradient"].append(
            np.stack([g.data for g in gradient(im)]))
    for name, results in outputs.items():
        assert np.array_equal(results[0], results[1]), name
        assert np.array_equal(results[0], results[2]), name
    _report("chunking invariance: bitwise identical for 1e3/1e5/1e7")
