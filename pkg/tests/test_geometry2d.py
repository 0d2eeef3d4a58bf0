"""Convex polytope geometry: examples and invariants."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singtrace.geometry2d import (
    ConvexPolytope2,
    contains,
    diameter,
    exposed_face,
    extreme_points,
    hull,
    project,
)

SQUARE = hull([(0, 0), (1, 0), (1, 1), (0, 1)])


def cross2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def brute_force_extremes(points):
    """A point is extreme iff it is not inside any triangle of other points."""
    pts = [np.asarray(p, dtype=float) for p in points]
    out = []
    for k, q in enumerate(pts):
        rest = [p for i, p in enumerate(pts) if i != k]
        inside = False
        # on-segment check (collinear interior points are not extreme)
        for i in range(len(rest)):
            for j in range(i + 1, len(rest)):
                a, b = rest[i], rest[j]
                ab = b - a
                den = float(ab @ ab)
                if den == 0.0:
                    continue
                t = float((q - a) @ ab) / den
                if 0.0 <= t <= 1.0 and np.hypot(*(a + t * ab - q)) <= 1e-12:
                    inside = True
        for i in range(len(rest)):
            for j in range(i + 1, len(rest)):
                for l in range(j + 1, len(rest)):
                    a, b, c = rest[i], rest[j], rest[l]
                    s1 = cross2(b - a, q - a)
                    s2 = cross2(c - b, q - b)
                    s3 = cross2(a - c, q - c)
                    if (s1 >= -1e-12 and s2 >= -1e-12 and s3 >= -1e-12) or (
                        s1 <= 1e-12 and s2 <= 1e-12 and s3 <= 1e-12
                    ):
                        inside = True
        if not inside:
            out.append(q)
    return out


class TestHull:
    def test_singleton(self):
        K = hull([(0, 0)])
        assert K.n == 1
        assert np.allclose(K.vertices[0], (0, 0))

    def test_collinear_collapse(self):
        K = hull([(0, 0), (1, 0), (0.5, 0)])
        assert K.n == 2
        got = sorted(map(tuple, K.vertices))
        assert np.allclose(got, [(0, 0), (1, 0)])

    def test_interior_point_dropped(self):
        # oracle: brute-force extreme-point test over all points
        pts = [(0, 0), (1, 0), (0, 1), (0.2, 0.2)]
        K = hull(pts)
        expected = brute_force_extremes(pts)
        assert K.n == len(expected) == 3
        for v in K.vertices:
            assert any(np.allclose(v, e) for e in expected)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            hull(np.zeros((0, 2)))

    def test_dedup_merges(self):
        K = hull([(0, 0), (0, 0), (1, 0), (1, 1e-14)])
        assert K.n == 2

    def test_ccw_orientation(self):
        K = hull([(1, 1), (0, 0), (1, 0), (0, 1)])
        v = K.vertices
        area2 = sum(
            v[i][0] * v[(i + 1) % 4][1] - v[(i + 1) % 4][0] * v[i][1]
            for i in range(4)
        )
        assert area2 > 0

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 10_000))
    def test_hull_contains_inputs_and_uses_only_inputs(self, n, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-3, 3, size=(n, 2))
        K = hull(pts)
        for p in pts:
            assert contains(K, p, 1e-12)
        for v in K.vertices:
            assert np.min(np.hypot(*(pts - v).T)) <= 1e-12


class TestExposedFace:
    def test_square_edge(self):
        f = exposed_face(SQUARE, (1, 0))
        assert f.kind == "segment"
        got = sorted(map(tuple, f.endpoints))
        assert np.allclose(got, [(0, 0), (0, 1)])

    def test_zero_direction_whole(self):
        f = exposed_face(SQUARE, (0, 0))
        assert f.kind == "whole"
        assert len(f.endpoints) == SQUARE.n

    def test_square_vertex(self):
        f = exposed_face(SQUARE, (1, 1))
        assert f.kind == "point"
        assert np.allclose(f.endpoints[0], (0, 0))

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 8), 2)))
            th = rng.normal(size=2)
            base = exposed_face(K, th)
            for lam in (0.5, 2.0, 10.0):
                f = exposed_face(K, lam * th)
                assert f.kind == base.kind
                assert f.vertex_indices == base.vertex_indices

    def test_support_inequality(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 8), 2)))
            th = rng.normal(size=2)
            f = exposed_face(K, th)
            thn = th / np.hypot(*th)
            for q in f.endpoints:
                for v in K.vertices:
                    assert q @ thn <= v @ thn + 1e-12

    def test_point_face_is_extreme(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 8), 2)))
            f = exposed_face(K, rng.normal(size=2))
            if f.kind == "point":
                ext = extreme_points(K)
                assert any(np.allclose(f.endpoints[0], e) for e in ext)

    def test_near_tie_resolves_to_edge(self):
        # vertices tying within tol expose the full edge, not one endpoint
        f = exposed_face(SQUARE, (1.0, 1e-15), tol=1e-12)
        assert f.kind == "segment"
        got = sorted(map(tuple, f.endpoints))
        assert np.allclose(got, [(0, 0), (0, 1)])

    def test_matches_vertex_enumeration(self):
        # oracle: direct argmin of <v, theta> over vertices
        rng = np.random.default_rng(17)
        for _ in range(200):
            K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 7), 2)))
            th = rng.normal(size=2)
            n = np.hypot(*th)
            if n < 1e-9:
                continue
            scores = K.vertices @ (th / n)
            best = set(np.nonzero(scores <= scores.min() + 1e-12)[0])
            f = exposed_face(K, th)
            assert set(f.vertex_indices) == best


class TestExtremePoints:
    def test_point(self):
        K = hull([(3, -2)])
        [e] = extreme_points(K)
        assert np.allclose(e, (3, -2))

    def test_segment(self):
        K = hull([(-1, 0), (1, 0)])
        eps = sorted(map(tuple, extreme_points(K)))
        assert np.allclose(eps, [(-1, 0), (1, 0)])

    def test_triangle(self):
        K = hull([(0, 0), (1, 0), (0, 1)])
        assert len(extreme_points(K)) == 3


class TestProject:
    def test_perpendicular_foot(self):
        K = hull([(-1, -1), (1, -1)])
        assert np.allclose(project(K, (0, 0)), (0, -1))

    def test_identity_on_members(self):
        for p in [(0.5, 0.5), (0, 0), (1, 0.3)]:
            assert np.allclose(project(SQUARE, p), p)

    def test_corner_against_boundary_sampling(self):
        # oracle: dense boundary sampling argmin
        p = np.array([2.0, 2.0])
        q = project(SQUARE, p)
        ts = np.linspace(0, 1, 20001)
        best = np.inf
        corners = SQUARE.vertices
        for i in range(4):
            seg = corners[i] + ts[:, None] * (corners[(i + 1) % 4] - corners[i])
            best = min(best, np.min(np.hypot(*(seg - p).T)))
        assert np.hypot(*(q - p)) <= best + 1e-9
        assert np.allclose(q, (1, 1))

    def test_variational_inequality(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 8), 2)))
            p = rng.uniform(-4, 4, size=2)
            q = project(K, p)
            for v in K.vertices:
                assert (p - q) @ (v - q) <= 1e-10


class TestContainsDiameter:
    def test_contains_inside(self):
        assert contains(SQUARE, (0.5, 0.5), 1e-12)

    def test_contains_outside(self):
        assert not contains(SQUARE, (2, 0), 1e-12)

    def test_contains_within_tolerance(self):
        K = hull([(-1, 0), (1, 0)])
        assert contains(K, (0, 1e-13), 1e-12)

    def test_diameter(self):
        assert diameter(hull([(2, 2)])) == 0.0
        assert diameter(hull([(-1, 0), (1, 0)])) == pytest.approx(2.0)
        assert diameter(SQUARE) == pytest.approx(np.sqrt(2))


def test_polytope_rejects_clockwise():
    with pytest.raises(ValueError):
        ConvexPolytope2(np.array([(0, 0), (0, 1), (1, 0)], dtype=float))
