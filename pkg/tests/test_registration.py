import numpy as np
import pytest
from scipy import ndimage

from medimg import (
    Image,
    RegistrationProblem,
    difference_image,
    ffd_initialize,
    register,
    rigid_params_to_matrix,
    transform_ffd,
    transform_rigid,
)
from medimg.errors import GeometryMismatchError, InvalidArgumentError


def structured_image(shape=(64, 64), seed=0):
    """Smooth random texture plus a bright off-centre blob (breaks symmetry).

    The intensity tapers to zero at the borders so the background blends
    with the padding value; otherwise boundary voxels flip between data and
    padding under sub-voxel motion and the cost landscape is discontinuous.
    """
    rng = np.random.default_rng(seed)
    im = Image.zeros(shape)
    im.data[:] = ndimage.gaussian_filter(rng.normal(size=shape), 4) * 100
    yy, xx = np.meshgrid(np.arange(shape[1]), np.arange(shape[0]))
    im.data += 80 * np.exp(-(((xx - shape[0] * 0.3) / 8) ** 2
                             + ((yy - shape[1] * 0.6) / 8) ** 2))
    for axis_len, coord in zip(shape, (xx, yy)):
        u = coord / (axis_len - 1)
        im.data *= np.clip(np.minimum(u, 1 - u) / 0.25, 0, 1) ** 2
    return im


class TestRigidRegistration:
    def test_self_registration(self):
        fixed = structured_image()
        problem = RegistrationProblem(fixed=fixed, moving=fixed,
                                      transform="rigid", metric="ssd",
                                      options={"max_iter": 50})
        res = register(problem)
        assert np.linalg.norm(res.params) <= 1e-3
        assert res.cost_final <= res.cost_initial

    def test_translation_recovery(self):
        fixed = structured_image()
        true = np.array([2.0, -3.0, 0.0])
        moving = transform_rigid(fixed, true, ref=fixed)
        problem = RegistrationProblem(fixed=fixed, moving=moving,
                                      metric="ncc", optimizer="lbfgs",
                                      options={"max_iter": 100})
        res = register(problem)
        # recovered transform must invert the applied one
        m = res.matrix @ rigid_params_to_matrix(
            true, centre=fixed.geometric_centre())
        assert np.max(np.abs(m - np.eye(3))) < 0.1

    def test_rotation_recovery(self):
        fixed = structured_image()
        theta = np.deg2rad(10)
        moving = transform_rigid(fixed, (0, 0, theta), ref=fixed)
        problem = RegistrationProblem(fixed=fixed, moving=moving,
                                      metric="ncc",
                                      options={"max_iter": 150})
        res = register(problem)
        assert abs(res.params[2] + theta) < np.deg2rad(0.5)
        assert res.cost_final < 0.02  # near-perfect correlation after alignment

    def test_result_fields(self):
        fixed = structured_image((32, 32))
        res = register(RegistrationProblem(fixed=fixed, moving=fixed,
                                           metric="ssd",
                                           options={"max_iter": 5}))
        assert np.array_equal(res.warped.size, fixed.size)
        assert res.matrix.shape == (3, 3)
        assert res.iterations >= 1


class TestFfdRegistration:
    def test_self_registration(self):
        fixed = structured_image((32, 32), seed=1)
        state = ffd_initialize(fixed, degree=1, levels=1, grid_spacing=(16, 16))
        problem = RegistrationProblem(fixed=fixed, moving=fixed,
                                      transform="ffd", ffd_state=state,
                                      metric="ssd", options={"max_iter": 5})
        res = register(problem)
        assert res.cost_final <= res.cost_initial
        assert res.cost_final <= 1e-6
        assert res.matrix is None

    def test_deformation_reduces_cost(self):
        fixed = structured_image((32, 32), seed=2)
        state = ffd_initialize(fixed, degree=1, levels=1, grid_spacing=(16, 16))
        rng = np.random.default_rng(3)
        true_params = rng.normal(size=state.num_params) * 1.0
        moving = transform_ffd(fixed, true_params, state)
        problem = RegistrationProblem(fixed=fixed, moving=moving,
                                      transform="ffd", ffd_state=state,
                                      metric="ssd", options={"max_iter": 30})
        res = register(problem)
        assert res.cost_final < 0.5 * res.cost_initial

    def test_x0_seeding(self):
        fixed = structured_image((32, 32), seed=4)
        state = ffd_initialize(fixed, degree=1, levels=1, grid_spacing=(16, 16))
        x0 = np.full(state.num_params, 0.25)
        problem = RegistrationProblem(fixed=fixed, moving=fixed,
                                      transform="ffd", ffd_state=state,
                                      metric="ssd", x0=x0,
                                      options={"max_iter": 3})
        res = register(problem)
        assert res.cost_final <= res.cost_initial


class TestProblemValidation:
    def test_unknown_metric(self):
        im = Image.zeros((8, 8))
        with pytest.raises(InvalidArgumentError):
            RegistrationProblem(fixed=im, moving=im, metric="mse")

    def test_unknown_optimizer(self):
        im = Image.zeros((8, 8))
        with pytest.raises(InvalidArgumentError):
            RegistrationProblem(fixed=im, moving=im, optimizer="adam")

    def test_unknown_transform(self):
        im = Image.zeros((8, 8))
        with pytest.raises(InvalidArgumentError):
            RegistrationProblem(fixed=im, moving=im, transform="affine")

    def test_ffd_requires_state(self):
        im = Image.zeros((8, 8))
        with pytest.raises(InvalidArgumentError):
            RegistrationProblem(fixed=im, moving=im, transform="ffd")

    def test_dimension_mismatch(self):
        with pytest.raises(GeometryMismatchError):
            RegistrationProblem(fixed=Image.zeros((8, 8)),
                                moving=Image.zeros((8, 8, 8)))

    def test_bad_x0_length(self):
        im = Image.zeros((8, 8))
        with pytest.raises(InvalidArgumentError):
            RegistrationProblem(fixed=im, moving=im, x0=np.zeros(6))


class TestDifferenceImage:
    def test_values(self):
        rng = np.random.default_rng(5)
        a = Image.zeros((6, 6))
        b = Image.zeros((6, 6))
        a.data[:] = rng.normal(size=(6, 6))
        b.data[:] = rng.normal(size=(6, 6))
        d = difference_image(a, b)
        assert np.array_equal(d.data, a.data - b.data)

    def test_grid_mismatch(self):
        a = Image.zeros((6, 6))
        b = Image.zeros((6, 6), origin=(1, 0))
        with pytest.raises(GeometryMismatchError):
            difference_image(a, b)
