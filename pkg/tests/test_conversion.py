import itertools

import numpy as np
import pytest

from fof.conversion import (
    integrate_intervals,
    match_discontinuities,
    match_symbols,
    mesh_to_fof,
    rasterize_events,
)
from fof.core import ENTER, EXIT, IntervalBuffer, TriangleMesh, evaluate_point, pixel_centers
from fof.errors import PreconditionError
from fof.shapes import icosphere, open_sphere

from conftest import quad_mesh
from oracles import is_alternating, quadrature_coefficients, reference_match, sphere_chord


def buffer_from_symbols(symbols):
    events = [(float(i), s) for i, s in enumerate(symbols)]
    return IntervalBuffer.from_event_lists(1, 1, {(0, 0): events})


class TestRasterize:
    def test_single_front_triangle(self, single_triangle):
        buf = rasterize_events(single_triangle, 32, 32)
        counts = buf.counts()
        assert counts.sum() > 0
        assert np.all(buf.orientations == ENTER)
        assert np.all((buf.depths >= 0.1) & (buf.depths <= 0.3))

    def test_cube_front_back_pairs(self, unit_cube):
        h = w = 32
        buf = rasterize_events(unit_cube, h, w)
        xs = pixel_centers(w)
        ys = pixel_centers(h)
        for y in range(h):
            for x in range(w):
                events = buf.events_at(x, y)
                covered = abs(xs[x]) < 0.5 and abs(ys[y]) < 0.5
                if covered:
                    assert [o for _, o in events] == [ENTER, EXIT]
                    assert events[0][0] == pytest.approx(-0.5)
                    assert events[1][0] == pytest.approx(0.5)
                else:
                    assert events == []

    def test_shared_edge_single_event(self):
        # pixel centers on the quad diagonal must get exactly one event
        mesh = quad_mesh(z=0.25)
        buf = rasterize_events(mesh, 16, 16)
        xs = pixel_centers(16)
        # the diagonal runs from (-0.6,-0.6) to (0.6,0.6): centers with x == y
        for i in range(16):
            if abs(xs[i]) < 0.6:
                events = buf.events_at(i, i)
                assert len(events) == 1, f"pixel {i} got {events}"

    def test_axis_aligned_shared_edge(self):
        # two quads sharing a vertical edge that passes exactly through
        # pixel centers: no double events anywhere
        verts = np.array([
            [-0.75, -0.75, 0.0], [0.0, -0.75, 0.1], [0.75, -0.75, 0.2],
            [-0.75, 0.75, 0.0], [0.0, 0.75, 0.1], [0.75, 0.75, 0.2],
        ])
        tris = np.array([[0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4]])
        mesh = TriangleMesh(verts, tris)
        buf = rasterize_events(mesh, 8, 8)  # centers at x = 0 exactly
        assert buf.counts().max() <= 1

    def test_degenerate_triangles_skipped(self):
        verts = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.25, 0.5, 0.0],
                          [0.0, 0.0, -0.4], [0.0, 0.5, 0.2]])
        tris = np.array([
            [0, 1, 2],   # valid front/back depending on winding
            [0, 1, 1],   # zero area
            [0, 3, 4],   # parallel to z (n_z = 0)
        ])
        _, report = mesh_to_fof(TriangleMesh(verts, tris), 16, 16, 4)
        assert report.triangles_skipped == 2

    def test_out_of_range_depth_clamped(self):
        verts = np.array([[-0.5, -0.5, -2.0], [0.5, -0.5, -2.0], [0.0, 0.5, 3.0]])
        mesh = TriangleMesh(verts, np.array([[0, 1, 2]]))
        buf = rasterize_events(mesh, 16, 16)
        assert buf.depths.min() >= -1.0
        assert buf.depths.max() <= 1.0

    def test_empty_mesh(self):
        mesh = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), int))
        fof, report = mesh_to_fof(mesh, 8, 8, 4)
        assert not fof.data.any()
        assert report.events_dropped == 0
        assert report.pixels_modified == 0


class TestMatcher:
    def test_clean_sequence_unchanged(self):
        assert match_symbols([0, 1, 0, 1]) == [0, 1, 0, 1]

    def test_leading_exit_dropped(self):
        assert match_symbols([1, 0, 1]) == [0, 1]

    def test_duplicate_faces_keep_first(self):
        assert match_symbols([0, 0, 1, 1]) == [0, 1]

    def test_dangling_enter_dropped(self):
        assert match_symbols([0, 1, 0]) == [0, 1]
        assert match_symbols([0]) == []

    def test_exhaustive_reference_equivalence(self):
        for length in range(0, 9):
            for bits in itertools.product((0, 1), repeat=length):
                got = match_symbols(bits)
                assert got == reference_match(bits), bits
                assert is_alternating(got), bits
                assert match_symbols(got) == got, bits  # idempotent

    def test_buffer_matcher_equals_symbol_matcher(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            symbols = rng.integers(0, 2, rng.integers(0, 10)).tolist()
            buf = buffer_from_symbols(symbols)
            matched, _ = match_discontinuities(buf)
            got = matched.orientations.tolist()
            assert got == match_symbols(symbols)

    def test_multi_pixel_buffer(self):
        events = {
            (0, 0): [(-0.5, ENTER), (0.5, EXIT)],
            (2, 1): [(-0.9, EXIT), (-0.2, ENTER), (0.3, EXIT), (0.4, EXIT)],
            (1, 1): [(0.1, ENTER)],
        }
        buf = IntervalBuffer.from_event_lists(3, 2, events)
        matched, report = match_discontinuities(buf)
        assert matched.events_at(0, 0) == [(-0.5, ENTER), (0.5, EXIT)]
        assert matched.events_at(2, 1) == [(-0.2, ENTER), (0.3, EXIT)]
        assert matched.events_at(1, 1) == []
        assert report.pixels_total == 6
        assert report.pixels_modified == 2
        assert report.events_dropped == 3

    def test_zero_length_interval_removed(self):
        buf = IntervalBuffer.from_event_lists(
            1, 1, {(0, 0): [(0.2, ENTER), (0.2, EXIT), (0.5, ENTER), (0.7, EXIT)]}
        )
        matched, _ = match_discontinuities(buf)
        assert matched.events_at(0, 0) == [(0.5, ENTER), (0.7, EXIT)]
        assert matched.is_matched()

    def test_unsorted_rejected(self):
        buf = IntervalBuffer.from_event_lists(
            1, 1, {(0, 0): [(0.5, ENTER), (-0.5, EXIT)]}
        )
        with pytest.raises(PreconditionError):
            match_discontinuities(buf)

    def test_idempotent_on_buffers(self, sphere2):
        buf = rasterize_events(sphere2, 64, 64)
        once, _ = match_discontinuities(buf)
        twice, report = match_discontinuities(once)
        assert report.events_dropped == 0
        assert np.array_equal(once.depths, twice.depths)


class TestIntegrate:
    def test_no_intervals_zero_vector(self):
        buf = IntervalBuffer.from_event_lists(2, 2, {})
        fof = integrate_intervals(buf, 6)
        assert not fof.data.any()

    def test_full_interval(self):
        buf = IntervalBuffer.from_event_lists(
            1, 1, {(0, 0): [(-1.0, ENTER), (1.0, EXIT)]}
        )
        fof = integrate_intervals(buf, 8)
        assert fof.data[0, 0, 0] == pytest.approx(2.0)
        np.testing.assert_allclose(fof.data[0, 0, 1:], 0.0, atol=1e-15)

    def test_half_interval_first_coefficient(self):
        buf = IntervalBuffer.from_event_lists(
            1, 1, {(0, 0): [(0.0, ENTER), (0.5, EXIT)]}
        )
        fof = integrate_intervals(buf, 2)
        expected = (2.0 / np.pi) * (np.sin(0.75 * np.pi) - np.sin(0.5 * np.pi))
        assert fof.data[0, 0, 1] == pytest.approx(expected, abs=1e-12)
        assert fof.data[0, 0, 1] == pytest.approx(-0.18646, abs=5e-6)

    def test_against_quadrature(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            k = rng.integers(1, 4)
            pts = np.sort(rng.uniform(-1, 1, 2 * k))
            intervals = list(zip(pts[0::2], pts[1::2]))
            events = []
            for z0, z1 in intervals:
                events += [(z0, ENTER), (z1, EXIT)]
            buf = IntervalBuffer.from_event_lists(1, 1, {(0, 0): events})
            got = integrate_intervals(buf, 64).data[0, 0]
            want = quadrature_coefficients(intervals, 64)
            np.testing.assert_allclose(got, want, atol=1e-9)

    def test_a0_equals_total_length(self):
        rng = np.random.default_rng(23)
        pts = np.sort(rng.uniform(-1, 1, 6))
        events = []
        total = 0.0
        for z0, z1 in zip(pts[0::2], pts[1::2]):
            events += [(z0, ENTER), (z1, EXIT)]
            total += z1 - z0
        buf = IntervalBuffer.from_event_lists(1, 1, {(0, 0): events})
        fof = integrate_intervals(buf, 4)
        assert fof.data[0, 0, 0] == pytest.approx(total, abs=1e-15)


class TestMeshToFof:
    def test_sphere_crossings_near_radius(self, sphere4):
        fof, _ = mesh_to_fof(sphere4, 256, 256, 128)
        zs = np.linspace(-1, 1, 4001)
        vals = np.array([evaluate_point(fof, 128, 128, z) for z in zs])
        flips = np.flatnonzero(np.diff((vals > 0.5).astype(int)))
        crossings = zs[flips]
        assert len(crossings) == 2
        chord = sphere_chord(0.6, pixel_centers(256)[128], pixel_centers(256)[128])
        assert crossings[0] == pytest.approx(chord[0], abs=0.01)
        assert crossings[1] == pytest.approx(chord[1], abs=0.01)

    def test_watertight_matcher_noop(self, unit_cube, sphere4):
        for mesh in (unit_cube, sphere4):
            buf = rasterize_events(mesh, 256, 256)
            matched, report = match_discontinuities(buf)
            assert report.events_dropped == 0
            assert report.pixels_modified == 0
            assert np.array_equal(matched.depths, buf.depths)
            assert np.array_equal(matched.orientations, buf.orientations)

    def test_triangle_order_invariance(self, sphere2):
        fof_a, _ = mesh_to_fof(sphere2, 64, 64, 32)
        rng = np.random.default_rng(9)
        perm = rng.permutation(sphere2.n_triangles)
        shuffled = TriangleMesh(sphere2.vertices, sphere2.triangles[perm])
        fof_b, _ = mesh_to_fof(shuffled, 64, 64, 32)
        assert np.array_equal(fof_a.data, fof_b.data)

    def test_open_sphere_no_floating_mass(self):
        clean = icosphere(0.6, 4)
        holed = open_sphere(0.6, 4, 0.10, seed=3)
        res = 128
        fof_clean, _ = mesh_to_fof(clean, res, res, 8)
        fof_holed, _ = mesh_to_fof(holed, res, res, 8)
        a0_clean = fof_clean.data[:, :, 0]
        a0_holed = fof_holed.data[:, :, 0]
        # no pixel may gain thickness beyond the clean chord (+tolerance)
        assert np.all(a0_holed <= a0_clean + 0.05)

    def test_matcher_disabled_creates_floating_mass(self):
        holed = open_sphere(0.6, 4, 0.10, seed=3)
        clean = icosphere(0.6, 4)
        res = 128
        fof_clean, _ = mesh_to_fof(clean, res, res, 8)
        fof_raw, _ = mesh_to_fof(holed, res, res, 8, use_matcher=False)
        excess = fof_raw.data[:, :, 0] - fof_clean.data[:, :, 0]
        assert (excess > 0.05).sum() > 50  # dangling enters reach z = +1
