import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from medimg import Image, neighborhood_offsets
from medimg.errors import (
    EmptyBoundsError,
    IndexOutOfRangeError,
    InvalidArgumentError,
    InvalidGeometryError,
)


def random_rotation(rng, n):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestConstruction:
    def test_defaults(self):
        im = Image.zeros((3, 3), (0, 0), (1, 1))
        assert np.all(im.data == 0)
        assert np.array_equal(im.orientation, np.eye(2))
        assert np.array_equal(im.index, [1, 1])
        assert im.padding_value == 0
        assert im.max_chunk_size == 10_000_000

    def test_centered_origin_expression(self):
        sz = np.array([100, 120, 130])
        sp = np.array([1.1, 1.0, 0.9])
        im = Image.zeros(sz, -(sz - 1) / 2 * sp, sp)
        assert np.allclose(im.origin, [-54.45, -59.5, -58.05])

    def test_template_copy(self):
        src = Image.zeros((4, 4), padding_value=5)
        src.data[:] = 3
        dup = Image.like(src)
        assert dup.padding_value == 5
        assert np.all(dup.data == 0)
        assert np.array_equal(dup.size, src.size)

    def test_invalid_geometry(self):
        with pytest.raises(InvalidGeometryError):
            Image.zeros((0, 3))
        with pytest.raises(InvalidGeometryError):
            Image.zeros((3, 3), spacing=(1, -1))
        with pytest.raises(InvalidGeometryError):
            Image.zeros((3, 3), orientation=[[1, 1], [0, 1]])


class TestIndexWorld:
    def test_origin_index(self):
        im = Image.zeros((3, 3))
        assert np.allclose(im.index_to_world((1, 1)), (0, 0))

    def test_rotated_hand_computed(self):
        rot90 = np.array([[0, -1], [1, 0]])
        im = Image.zeros((3, 4), (10, 10), (2, 1), rot90)
        assert np.allclose(im.index_to_world((2, 1)), (10, 12))
        assert np.allclose(im.world_to_continuous_index((10, 12)), (2, 1))

    def test_linear_index_form(self):
        im = Image.zeros((3, 4), (10, 10), (2, 1), np.array([[0, -1], [1, 0]]))
        via_linear = im.index_to_world(np.array([[8.0]]))
        via_nd = im.index_to_world((2, 3))
        assert np.allclose(via_linear[:, 0], via_nd)

    def test_round_trip_random(self):
        rng = np.random.default_rng(7)
        for n in (2, 3, 4):
            im = Image.zeros([4] * n, rng.normal(size=n),
                             rng.uniform(0.3, 2.5, n), random_rotation(rng, n))
            idx = rng.uniform(1, 4, size=(n, 100))
            pos = im.index_to_world(idx)
            back = im.world_to_continuous_index(pos)
            assert np.max(np.abs(back - idx)) < 1e-10

    def test_all_positions_storage_order(self):
        im = Image.zeros((2, 3))
        pos = im.index_to_world()
        assert pos.shape == (2, 6)
        # first dimension fastest
        assert np.allclose(pos[:, 1], (1, 0))
        assert np.allclose(pos[:, 2], (0, 1))


class TestPixels:
    def test_set_get_roundtrip(self):
        im = Image.zeros((3, 3))
        im.set_pixel((2, 2), 7)
        assert im.get_pixel((2, 2)) == 7
        assert im.get_pixel((1, 1)) == 0

    def test_one_based_bounds(self):
        im = Image.zeros((3, 3))
        with pytest.raises(IndexOutOfRangeError):
            im.get_pixel((0, 1))
        with pytest.raises(IndexOutOfRangeError):
            im.get_pixel((3, 4))

    def test_linear_index_example(self):
        im = Image.zeros((3, 4))
        assert im.linear_index((2, 3)) == 8
        assert im.linear_index((1, 1)) == 1
        assert np.array_equal(im.nd_index(8), (2, 3))

    def test_linear_nd_bijection(self):
        im = Image.zeros((3, 4, 5))
        for lin in range(1, 61):
            assert im.linear_index(im.nd_index(lin)) == lin

    def test_strides(self):
        im = Image.zeros((3, 4, 5))
        assert np.array_equal(im.get_strides(), (1, 3, 12))


class TestGetValue:
    def test_voxel_center_exact(self):
        rng = np.random.default_rng(1)
        im = Image.zeros((4, 4))
        im.data[:] = rng.normal(size=(4, 4))
        for idx in ((1, 1), (2, 3), (4, 4)):
            pos = im.index_to_world(idx)
            assert im.get_value(pos, "linear") == im.get_pixel(idx)
            assert im.get_value(pos, "nearest") == im.get_pixel(idx)

    def test_linear_midpoint(self):
        im = Image.zeros((2, 1))
        im.data[1, 0] = 10
        assert im.get_value((0.5, 0), "linear") == 5

    def test_outside_returns_padding(self):
        im = Image.zeros((3, 3), padding_value=-7)
        assert im.get_value((99, 99)) == -7
        assert im.get_value((99, 99), "linear") == -7

    def test_default_mode_nearest_half_rounds_up(self):
        im = Image.zeros((3, 1))
        im.data[:, 0] = (0, 5, 9)
        # continuous index 1.5 -> voxel 2
        assert im.get_value((0.5, 0)) == 5

    def test_unknown_mode(self):
        im = Image.zeros((3, 3))
        with pytest.raises(InvalidArgumentError):
            im.get_value((0, 0), "spline")

    def test_linear_bounded_by_neighbors(self):
        rng = np.random.default_rng(3)
        im = Image.zeros((5, 5))
        im.data[:] = rng.normal(size=(5, 5))
        pos = rng.uniform(0, 4, size=(2, 200))
        vals = im.get_value(pos, "linear")
        assert vals.min() >= im.data.min() - 1e-12
        assert vals.max() <= im.data.max() + 1e-12


class TestNeighborhoods:
    def test_counts(self):
        assert len(neighborhood_offsets(2, 1, "cube")) == 9
        assert len(neighborhood_offsets(3, 2, "cube")) == 125
        assert len(neighborhood_offsets(3, 1, "ball")) == 7

    def test_ball_subset_of_cube_with_center(self):
        for n in (1, 2):
            cube = set(neighborhood_offsets(3, n, "cube"))
            ball = set(neighborhood_offsets(3, n, "ball"))
            assert ball <= cube
            assert (0, 0, 0) in ball

    def test_invalid_width(self):
        with pytest.raises(InvalidArgumentError):
            neighborhood_offsets(2, 0)


class TestBoundsAndFrames:
    def test_get_bounds_block(self):
        im = Image.zeros((8, 8))
        im.data[2:5, 3:6] = 1  # indices x 3..5, y 4..6
        assert np.allclose(im.get_bounds(0), (2, 4, 3, 5))

    def test_get_bounds_full_and_empty(self):
        im = Image.zeros((4, 4))
        im.data[:] = 1
        assert np.allclose(im.get_bounds(0), (0, 3, 0, 3))
        with pytest.raises(EmptyBoundsError):
            Image.zeros((4, 4)).get_bounds(0)

    def test_extract_frame(self):
        im = Image.zeros((3, 3, 3, 4))
        for t in range(4):
            im.data[:, :, :, t] = t + 1
        fr = im.extract_frame(2)
        assert fr.ndim == 3
        assert np.all(fr.data == 2)
        assert np.array_equal(fr.size, (3, 3, 3))
        with pytest.raises(InvalidArgumentError):
            im.extract_frame(0)
        with pytest.raises(InvalidArgumentError):
            Image.zeros((3, 3)).extract_frame(1)

    def test_force_2d(self):
        im = Image.zeros((5, 1, 5))
        assert np.array_equal(im.force_2d().size, (5, 5))
        with pytest.raises(InvalidArgumentError):
            Image.zeros((5, 5, 5)).force_2d()

    def test_geometric_centre(self):
        im = Image.zeros((3, 3))
        assert np.allclose(im.geometric_centre(), (1, 1))

    def test_set_origin_to_centre(self):
        im = Image.zeros((4, 6), (3, -2), (1.5, 0.5))
        im.set_origin_to_centre()
        assert np.max(np.abs(im.geometric_centre())) < 1e-12

    def test_is_out_of_range(self):
        im = Image.zeros((3, 3))
        assert not im.is_out_of_range((1, 3))
        assert im.is_out_of_range((0, 1))
        assert im.is_out_of_range((1, 4))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2 ** 31 - 1))
def test_round_trip_property(ndim, seed):
    rng = np.random.default_rng(seed)
    im = Image.zeros([3] * ndim, rng.normal(size=ndim),
                     rng.uniform(0.2, 3.0, ndim), random_rotation(rng, ndim))
    idx = rng.uniform(-2, 6, size=(ndim, 20))
    back = im.world_to_continuous_index(im.index_to_world(idx))
    assert np.max(np.abs(back - idx)) < 1e-10
