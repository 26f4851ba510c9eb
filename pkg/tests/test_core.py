import numpy as np
import pytest

from fof.core import (
    FofGrid,
    TriangleMesh,
    default_z_grid,
    evaluate_field,
    evaluate_point,
    make_basis,
    normalize_mesh,
    pixel_centers,
    resample_grid,
)
from fof.errors import DegenerateInputError, DomainError, EmptyInputError, ShapeError

from oracles import direct_field_eval, sphere_coefficients


class TestTriangleMesh:
    def test_index_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            TriangleMesh(np.zeros((2, 3)), np.array([[0, 1, 2]]))

    def test_nonfinite_rejected(self):
        with pytest.raises(DomainError):
            TriangleMesh(np.array([[0.0, 0.0, np.nan]]), np.zeros((0, 3), int))

    def test_immutable(self, unit_cube):
        with pytest.raises(ValueError):
            unit_cube.vertices[0, 0] = 5.0


class TestNormalizeMesh:
    def test_unit_cube_margin(self, unit_cube):
        out, tf = normalize_mesh(unit_cube, margin=0.1)
        assert tf.scale == pytest.approx(1.8)
        assert out.vertices.max() == pytest.approx(0.9)
        assert out.vertices.min() == pytest.approx(-0.9)

    def test_rescales_even_when_already_inside(self, unit_cube):
        small = TriangleMesh(unit_cube.vertices * 0.25, unit_cube.triangles)
        out, _ = normalize_mesh(small, margin=0.0)
        assert abs(out.vertices.max() - 1.0) < 1e-12
        assert abs(out.vertices.min() + 1.0) < 1e-12

    def test_round_trip_transform(self, unit_cube):
        shifted = TriangleMesh(unit_cube.vertices * 3.0 + 1.5, unit_cube.triangles)
        out, tf = normalize_mesh(shifted, margin=0.05)
        back = tf.inverse().apply(out.vertices)
        np.testing.assert_allclose(back, shifted.vertices, atol=1e-12)

    def test_empty_mesh(self):
        with pytest.raises(EmptyInputError):
            normalize_mesh(TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), int)))

    def test_degenerate_point_cloud(self):
        verts = np.zeros((3, 3))
        with pytest.raises(DegenerateInputError):
            normalize_mesh(TriangleMesh(verts, np.array([[0, 1, 2]])))

    def test_bad_margin(self, unit_cube):
        with pytest.raises(DomainError):
            normalize_mesh(unit_cube, margin=1.0)


class TestBasis:
    def test_single_term_is_half(self):
        b = make_basis(1, np.linspace(-1, 1, 7))
        assert np.all(b.matrix == 0.5)

    def test_two_terms_at_minus_one(self):
        b = make_basis(2, [-1.0])
        np.testing.assert_allclose(b.matrix[0], [0.5, 1.0])

    def test_three_terms_at_zero(self):
        b = make_basis(3, [0.0])
        np.testing.assert_allclose(b.matrix[0], [0.5, 0.0, -1.0], atol=1e-15)

    def test_first_column_exactly_half(self):
        b = make_basis(9, np.linspace(-1, 1, 33))
        assert np.all(b.matrix[:, 0] == 0.5)
        assert np.abs(b.matrix).max() <= 1.0

    def test_out_of_range_z(self):
        with pytest.raises(DomainError):
            make_basis(4, [0.0, 1.5])

    def test_boundary_derivative_vanishes(self):
        # cosine/even extension: zero slope at z = +-1 for every n >= 1,
        # probed with a second-order one-sided difference (step 1e-4)
        step = 1e-4
        for z_edge, sign in ((-1.0, 1.0), (1.0, -1.0)):
            f0 = make_basis(32, [z_edge]).matrix[0]
            f1 = make_basis(32, [z_edge + sign * step]).matrix[0]
            f2 = make_basis(32, [z_edge + 2 * sign * step]).matrix[0]
            deriv = sign * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step)
            assert np.abs(deriv).max() < 1e-3


class TestEvaluate:
    def test_zero_grid(self):
        fof = FofGrid(np.zeros((3, 4, 5)))
        vol = evaluate_field(fof, make_basis(5, default_z_grid(6)))
        assert not vol.data.any()

    def test_full_interval_constant_one(self):
        data = np.zeros((2, 2, 8))
        data[..., 0] = 2.0
        vol = evaluate_field(FofGrid(data), make_basis(8, default_z_grid(9)))
        np.testing.assert_allclose(vol.data, 1.0)
        assert evaluate_point(FofGrid(data), 1, 0, 0.37) == pytest.approx(1.0)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(42)
        data = rng.normal(size=(4, 4, 16))
        zs = rng.uniform(-1, 1, 9)
        vol = evaluate_field(FofGrid(data), make_basis(16, zs))
        for y in range(4):
            for x in range(4):
                for d, z in enumerate(zs):
                    assert vol.data[y, x, d] == pytest.approx(
                        direct_field_eval(data[y, x], z), abs=1e-6
                    )

    def test_term_mismatch(self):
        with pytest.raises(ShapeError):
            evaluate_field(FofGrid(np.zeros((2, 2, 4))), make_basis(5, [0.0]))

    def test_point_index_errors(self):
        fof = FofGrid(np.zeros((2, 2, 4)))
        with pytest.raises(IndexError):
            evaluate_point(fof, 2, 0, 0.0)
        with pytest.raises(DomainError):
            evaluate_point(fof, 0, 0, 1.5)

    def test_point_matches_field(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=(3, 5, 12))
        fof = FofGrid(data)
        zs = rng.uniform(-1, 1, 5)
        vol = evaluate_field(fof, make_basis(12, zs))
        for d, z in enumerate(zs):
            assert evaluate_point(fof, 4, 2, z) == pytest.approx(
                vol.data[2, 4, d], abs=1e-6
            )

    def test_sphere_pixel_inside_is_occupied(self):
        # coefficients of an analytic sphere chord: inside evaluates > 0.5
        for terms in (32, 64, 128):
            coeffs = sphere_coefficients(0.6, 0.05, -0.1, terms)
            fof = FofGrid(coeffs.reshape(1, 1, terms))
            assert evaluate_point(fof, 0, 0, 0.0) > 0.5
            assert evaluate_point(fof, 0, 0, 0.9) < 0.5


class TestSamplingScalability:
    def test_nested_grids_bitwise_equal(self):
        rng = np.random.default_rng(7)
        data = rng.normal(size=(6, 5, 24))
        fof = FofGrid(data)
        coarse = np.sort(rng.uniform(-1, 1, 17))
        extra = np.sort(rng.uniform(-1, 1, 23))
        fine = np.sort(np.concatenate([coarse, extra]))
        vol_c = evaluate_field(fof, make_basis(24, coarse))
        vol_f = evaluate_field(fof, make_basis(24, fine))
        pos = np.searchsorted(fine, coarse)
        assert np.array_equal(vol_c.data, vol_f.data[:, :, pos])

    def test_linearity(self):
        rng = np.random.default_rng(11)
        c1 = rng.normal(size=(3, 3, 10))
        c2 = rng.normal(size=(3, 3, 10))
        basis = make_basis(10, default_z_grid(13))
        a, b = 0.7, -2.3
        combined = evaluate_field(FofGrid(a * c1 + b * c2), basis)
        split = a * evaluate_field(FofGrid(c1), basis).data + b * evaluate_field(
            FofGrid(c2), basis
        ).data
        np.testing.assert_allclose(combined.data, split, atol=1e-6)


class TestResample:
    def test_identity(self):
        rng = np.random.default_rng(0)
        fof = FofGrid(rng.normal(size=(8, 8, 3)))
        out = resample_grid(fof, 8, 8)
        assert np.array_equal(out.data, fof.data)

    def test_downsample_picks_owning_pixel(self):
        data = np.arange(16, dtype=float).reshape(4, 4, 1)
        out = resample_grid(FofGrid(data), 2, 2)
        # coarse centers land on cell boundaries; ties take the higher pixel
        np.testing.assert_array_equal(out.data[:, :, 0], [[5.0, 7.0], [13.0, 15.0]])

    def test_upsample_duplicates(self):
        rng = np.random.default_rng(1)
        fof = FofGrid(rng.normal(size=(2, 2, 2)))
        out = resample_grid(fof, 4, 4)
        assert np.array_equal(out.data[0, 0], fof.data[0, 0])
        assert np.array_equal(out.data[3, 3], fof.data[1, 1])

    def test_pixel_centers(self):
        np.testing.assert_allclose(pixel_centers(2), [-0.5, 0.5])
