"""Lorentz manifold calculus: values, invariants, and metric axioms."""

import math

import numpy as np
import pytest

from hypervd import lorentz
from hypervd.errors import CurvatureError, DimensionError


def random_tangents(rng, count, n, max_norm):
    """Rows with Euclidean norms uniform in (0, max_norm]."""
    v = rng.standard_normal((count, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * (max_norm * rng.uniform(0.05, 1.0, size=(count, 1)))


def random_points(rng, n, count, k=-1.0, max_norm=2.0):
    return lorentz.lift_to_manifold(random_tangents(rng, count, n, max_norm), k)


class TestMinkowskiInner:
    def test_origin_self_inner(self):
        assert lorentz.minkowski_inner([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]) == -1.0

    def test_disjoint_spatial_support(self):
        assert lorentz.minkowski_inner([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]) == 0.0

    def test_mixed_value(self):
        got = lorentz.minkowski_inner([math.sqrt(2), 1.0, 0.0], [1.0, 0.0, 0.0])
        assert got == pytest.approx(-math.sqrt(2), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            lorentz.minkowski_inner([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_too_short(self):
        with pytest.raises(DimensionError):
            lorentz.minkowski_inner([1.0], [1.0])

    def test_batched(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((5, 4))
        y = rng.standard_normal((5, 4))
        got = lorentz.minkowski_inner(x, y)
        expected = [-a[0] * b[0] + a[1:] @ b[1:] for a, b in zip(x, y)]
        np.testing.assert_allclose(got, expected, atol=1e-12)


class TestLorentzNorm:
    def test_spacelike(self):
        assert lorentz.lorentz_norm([0.0, 3.0, 4.0]) == pytest.approx(5.0)

    def test_zero(self):
        assert lorentz.lorentz_norm(np.zeros(6)) == 0.0

    def test_timelike_uses_absolute_value(self):
        assert lorentz.lorentz_norm([1.0, 0.0, 0.0]) == pytest.approx(1.0)


class TestOrigin:
    def test_unit_curvature(self):
        np.testing.assert_array_equal(lorentz.origin(2), [1.0, 0.0, 0.0])

    def test_high_dimension(self):
        o = lorentz.origin(256)
        assert o.shape == (257,)
        assert o[0] == 1.0
        assert np.all(o[1:] == 0.0)

    def test_steeper_curvature(self):
        np.testing.assert_allclose(lorentz.origin(2, k=-4.0), [0.5, 0.0, 0.0])

    def test_nonnegative_curvature_rejected(self):
        with pytest.raises(CurvatureError):
            lorentz.origin(2, k=0.0)
        with pytest.raises(CurvatureError):
            lorentz.origin(2, k=1.0)


class TestExpMap:
    def test_zero_tangent_is_identity(self):
        rng = np.random.default_rng(1)
        x = random_points(rng, 4, 3)
        np.testing.assert_array_equal(lorentz.exp_map(x, np.zeros_like(x)), x)

    def test_unit_tangent_at_origin(self):
        got = lorentz.exp_map(lorentz.origin(2), np.array([0.0, 1.0, 0.0]))
        np.testing.assert_allclose(got, [math.cosh(1.0), math.sinh(1.0), 0.0], atol=1e-12)

    def test_manifold_closure(self):
        rng = np.random.default_rng(2)
        for k in (-1.0, -0.5, -4.0):
            reach = 5.0 / math.sqrt(-k)  # keep geodesic reach comparable across k
            x = random_points(rng, 6, 50, k=k, max_norm=1.5)
            z = rng.standard_normal((50, 7))
            # project onto the tangent space at x, then scale norms into (0, reach]
            z = z - k * lorentz.minkowski_inner(x, z)[:, None] * x
            z *= (reach * rng.uniform(0.05, 1.0, size=(50, 1))) / lorentz.lorentz_norm(z)[:, None]
            y = lorentz.exp_map(x, z, k)
            assert np.max(lorentz.manifold_residual(y, k)) < 1e-9


class TestLogMap:
    def test_coincident_points(self):
        x = lorentz.lift_to_manifold(np.array([0.3, -0.7]))
        np.testing.assert_array_equal(lorentz.log_map(x, x), np.zeros(3))

    def test_inverse_of_exp_at_origin(self):
        x = lorentz.origin(2)
        y = np.array([math.cosh(1.0), math.sinh(1.0), 0.0])
        np.testing.assert_allclose(lorentz.log_map(x, y), [0.0, 1.0, 0.0], atol=1e-12)

    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        x = random_points(rng, 5, 40)
        z = rng.uniform(-2, 2, size=(40, 6))
        z = z + lorentz.minkowski_inner(x, z)[:, None] * x  # tangent at x for k=-1
        z *= (5.0 * rng.uniform(0.05, 1.0, size=(40, 1))) / lorentz.lorentz_norm(z)[:, None]
        y = lorentz.exp_map(x, z)
        back = lorentz.log_map(x, y)
        np.testing.assert_allclose(back, z, atol=1e-8)


class TestGeodesicDistance:
    def test_self_distance(self):
        rng = np.random.default_rng(4)
        x = random_points(rng, 4, 10)
        np.testing.assert_allclose(lorentz.geodesic_distance(x, x), 0.0, atol=1e-6)

    def test_known_value(self):
        y = np.array([math.cosh(2.0), math.sinh(2.0), 0.0])
        assert lorentz.geodesic_distance(lorentz.origin(2), y) == pytest.approx(2.0)

    def test_metric_axioms(self):
        rng = np.random.default_rng(5)
        x = random_points(rng, 5, 200)
        y = random_points(rng, 5, 200)
        z = random_points(rng, 5, 200)
        dxy = lorentz.geodesic_distance(x, y)
        dyx = lorentz.geodesic_distance(y, x)
        dxz = lorentz.geodesic_distance(x, z)
        dzy = lorentz.geodesic_distance(z, y)
        assert np.all(dxy >= 0)
        np.testing.assert_allclose(dxy, dyx, atol=1e-9)
        assert np.all(dxy <= dxz + dzy + 1e-9)

    def test_pairwise_matches_pointwise(self):
        rng = np.random.default_rng(6)
        pts = random_points(rng, 4, 12)
        full = lorentz.pairwise_geodesic(pts)
        assert np.all(np.diag(full) == 0.0)
        for i in range(12):
            for j in range(12):
                if i != j:
                    assert full[i, j] == pytest.approx(
                        lorentz.geodesic_distance(pts[i], pts[j]), abs=1e-9
                    )


class TestLift:
    def test_zero_vector_gives_origin(self):
        got = lorentz.lift_to_manifold(np.zeros(256))
        np.testing.assert_array_equal(got, lorentz.origin(256))

    def test_unit_vector_closed_form(self):
        rng = np.random.default_rng(7)
        v = rng.standard_normal(5)
        v /= np.linalg.norm(v)
        got = lorentz.lift_to_manifold(v)
        np.testing.assert_allclose(got[0], math.cosh(1.0), atol=1e-12)
        np.testing.assert_allclose(got[1:], math.sinh(1.0) * v, atol=1e-12)

    def test_manifold_closure(self):
        rng = np.random.default_rng(8)
        for k in (-1.0, -2.5):
            v = random_tangents(rng, 100, 9, 5.0 / math.sqrt(-k))
            p = lorentz.lift_to_manifold(v, k)
            assert np.max(lorentz.manifold_residual(p, k)) < 1e-9

    def test_distance_from_origin_equals_euclidean_norm(self):
        rng = np.random.default_rng(9)
        v = rng.uniform(-3, 3, size=(50, 6))
        p = lorentz.lift_to_manifold(v)
        d = lorentz.geodesic_distance(lorentz.origin(6)[None, :], p)
        np.testing.assert_allclose(d, np.linalg.norm(v, axis=1), atol=1e-9)
