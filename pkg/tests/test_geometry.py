import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylproc import geometry as geo


def test_unit_ball_volume_values():
    assert geo.unit_ball_volume(0) == 1.0
    assert geo.unit_ball_volume(2) == pytest.approx(math.pi, abs=1e-12)
    # Gamma(3) = 2 in pi^{k/2} / Gamma(k/2 + 1)
    assert geo.unit_ball_volume(4) == pytest.approx(math.pi**2 / 2, abs=1e-12)
    assert geo.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, abs=1e-12)


def test_intrinsic_volumes_examples():
    np.testing.assert_allclose(geo.intrinsic_volumes(geo.Box((0.5, 0.5)), 2), [1, 2, 1])
    np.testing.assert_allclose(geo.intrinsic_volumes(geo.Ball(1.0), 2), [1, math.pi, math.pi])
    np.testing.assert_allclose(geo.intrinsic_volumes(geo.Point(), 1), [1, 0])
    np.testing.assert_allclose(geo.intrinsic_volumes(geo.Interval(0.2, 0.7), 1), [1, 0.9])


def test_ball_intrinsic_volumes_fit_steiner_polynomial():
    # oracle: volume of the eps-parallel ball sampled at several eps, solved for V_j
    d = 3
    eps = np.array([0.1, 0.4, 0.9, 1.7])
    vols = geo.unit_ball_volume(3) * (1.0 + eps) ** 3
    A = np.stack([eps ** (d - j) * geo.unit_ball_volume(d - j) for j in range(d + 1)], axis=1)
    V = np.linalg.solve(A, vols)
    np.testing.assert_allclose(geo.intrinsic_volumes(geo.Ball(1.0), 3), V, rtol=1e-10)


def test_parallel_volume_examples():
    sq = geo.Box((0.5, 0.5))
    assert geo.parallel_volume(sq, 2, 0.0) == pytest.approx(1.0)
    assert geo.parallel_volume(sq, 2, 0.1) == pytest.approx(1 + 0.4 + 0.01 * math.pi, abs=1e-12)
    assert geo.parallel_volume(geo.Ball(1.0), 3, 1.0) == pytest.approx(
        geo.unit_ball_volume(3) * 8, abs=1e-12)


@pytest.mark.parametrize("shape,dim", [
    (geo.Ball(0.7), 2), (geo.Box((0.5, 0.2)), 2), (geo.Interval(0.3, 0.6), 1),
    (geo.Box((0.3, 0.4, 0.2)), 3), (geo.Point(), 2),
])
def test_steiner_matches_hit_or_miss(shape, dim):
    rng = np.random.default_rng(11)
    N = 40_000
    half = geo.reach(shape) + 0.5
    for eps in (0.05, 0.1, 0.2, 0.3, 0.5):
        u = rng.uniform(-half, half, size=(N, dim))
        p = np.mean(geo.distance(shape, u) <= eps)
        box = (2 * half) ** dim
        se = box * math.sqrt(p * (1 - p) / N)
        exact = geo.parallel_volume(shape, dim, eps)
        assert abs(box * p - exact) <= 3 * se + 1e-9


def test_covariogram_examples():
    iv = geo.FixedBase(geo.Interval(0.5, 0.5))
    assert geo.covariogram_f(iv, np.array([[0.5]]), 1)[0] == pytest.approx(0.5)
    disk = geo.FixedBase(geo.Ball(1.0))
    assert geo.covariogram_f(disk, np.array([[0.0, 0.0]]), 2)[0] == pytest.approx(math.pi)
    expected = 2 * (math.acos(0.5) - 0.5 * math.sqrt(3) / 2)
    assert geo.covariogram_f(disk, np.array([[1.0, 0.0]]), 2)[0] == pytest.approx(expected,
                                                                                 abs=1e-12)


def test_disk_covariogram_hit_or_miss_oracle():
    rng = np.random.default_rng(3)
    N = 200_000
    u = rng.uniform(-1, 1, size=(N, 2))
    both = (np.sum(u**2, axis=1) <= 1) & (np.sum((u - [1.0, 0.0]) ** 2, axis=1) <= 1)
    p = both.mean()
    est, se = 4 * p, 4 * math.sqrt(p * (1 - p) / N)
    val = geo.covariogram_f(geo.FixedBase(geo.Ball(1.0)), np.array([[1.0, 0.0]]), 2)[0]
    assert abs(est - val) <= 3 * se


def test_boundary_covariogram_examples():
    iv = geo.FixedBase(geo.Interval(0.5, 0.5))
    assert geo.covariogram_g(iv, np.array([[0.3]]), 1)[0] == pytest.approx(1.0)
    assert geo.covariogram_g(iv, np.array([[0.0]]), 1)[0] == pytest.approx(2.0)
    disk = geo.FixedBase(geo.Ball(1.0))
    assert geo.covariogram_g(disk, np.array([[1.0, 0.0]]), 2)[0] == pytest.approx(
        2 * math.acos(0.5), abs=1e-12)


def test_disk_boundary_covariogram_arc_oracle():
    # oracle: fraction of the circle of radius 1 inside the shifted disk, times its length
    phi = (np.arange(200_000) + 0.5) / 200_000 * 2 * math.pi
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    inside = np.sum((pts - [1.0, 0.0]) ** 2, axis=1) <= 1.0
    arc = 2 * math.pi * inside.mean()
    val = geo.covariogram_g(geo.FixedBase(geo.Ball(1.0)), np.array([[1.0, 0.0]]), 2)[0]
    assert val == pytest.approx(arc, abs=1e-4)


@pytest.mark.parametrize("law,dim", [
    (geo.FixedBase(geo.Ball(0.4)), 2),
    (geo.FixedBase(geo.Interval(0.3, 0.3)), 1),
    (geo.DilatedBase(geo.Ball(1.0), geo.UniformRadius(0.5, 1.5)), 2),
])
def test_covariogram_symmetry_and_support(law, dim):
    rng = np.random.default_rng(5)
    z = rng.normal(size=(50, dim))
    np.testing.assert_allclose(geo.covariogram_f(law, z, dim), geo.covariogram_f(law, -z, dim),
                               atol=1e-14)
    far = z / np.linalg.norm(z, axis=1, keepdims=True) * (geo.law_diameter(law) * 1.01)
    assert np.all(geo.covariogram_f(law, far, dim) == 0)


@pytest.mark.parametrize("law,dim", [
    (geo.FixedBase(geo.Ball(0.4)), 2),
    (geo.FixedBase(geo.Box((0.2, 0.5))), 2),
    (geo.FixedBase(geo.Interval(0.1, 0.6)), 1),
    (geo.DilatedBase(geo.Ball(1.0), geo.UniformRadius(0.5, 1.5)), 2),
    (geo.DilatedBase(geo.Interval(0.5, 0.5), geo.ConstantRadius(2.0)), 1),
])
def test_covariogram_at_zero_is_mean_volume(law, dim):
    f0 = geo.covariogram_f(law, np.zeros((1, dim)), dim)[0]
    assert f0 == pytest.approx(geo.law_intvol_moment(law, dim, dim), rel=1e-12)


def test_haar_frames_orthonormal_under_composition():
    rng = np.random.default_rng(0)
    Q = geo.haar_rotations(4, 200, rng)
    f = geo.random_frame(4, 2, rng)
    for q in Q:
        g = f.compose(q)
        assert np.max(np.abs(g.matrix.T @ g.matrix - np.eye(4))) <= 1e-12
        assert np.linalg.det(q) == pytest.approx(1.0)


def test_haar_first_column_is_uniform_on_sphere():
    rng = np.random.default_rng(1)
    Q = geo.haar_rotations(3, 20_000, rng)
    col = Q[:, :, 0]
    # uniform on S^2: each coordinate is Uniform(-1, 1), mean 0, variance 1/3
    np.testing.assert_allclose(col.mean(axis=0), 0, atol=0.02)
    np.testing.assert_allclose(col.var(axis=0), 1 / 3, atol=0.02)


def test_frame_rejects_non_orthonormal():
    with pytest.raises(geo.GeometryError):
        geo.Frame(np.array([[1.0, 0.1], [0.0, 1.0]]), 1)


def test_membership_reciprocity():
    rng = np.random.default_rng(2)
    n, m = 3, 1
    shapes = [geo.Ball(0.4), geo.Box((0.3, 0.2)), geo.Point()]
    count = 0
    for shape in shapes:
        for _ in range(20):
            frame = geo.random_frame(n, m, rng)
            x = rng.normal(size=n - m) * 0.3
            cyl = geo.Cylinder(x, frame, shape)
            y = rng.normal(size=(170, n)) * 0.6
            u = y @ frame.matrix[:, : n - m] - x
            np.testing.assert_array_equal(cyl.contains(y), geo.contains(shape, u))
            count += len(y)
    assert count >= 10_000


def test_interval_convention():
    iv = geo.Interval(0.2, 0.8)
    assert iv.length == pytest.approx(1.0)
    np.testing.assert_array_equal(geo.contains(iv, np.array([[-0.2], [0.8], [-0.21], [0.81]])),
                                  [True, True, False, False])


def test_shape_dim_checks():
    with pytest.raises(geo.GeometryError):
        geo.check_shape_dim(geo.Interval(0.5, 0.5), 2)
    with pytest.raises(geo.GeometryError):
        geo.check_shape_dim(geo.Box((0.5, 0.5)), 3)
    with pytest.raises(geo.GeometryError):
        geo.Ball(-1.0)


@pytest.mark.parametrize("window", [geo.BallWindow(1.0), geo.CubeWindow(2.0)])
def test_window_samples_inside(window):
    rng = np.random.default_rng(4)
    y = window.sample(rng, 5000, 3, 2.5)
    if isinstance(window, geo.BallWindow):
        assert np.all(np.linalg.norm(y, axis=1) <= 2.5 + 1e-12)
    else:
        assert np.all(np.abs(y) <= 2.5 + 1e-12)


def test_window_covariogram_at_zero_is_volume():
    for w in (geo.BallWindow(1.3), geo.CubeWindow(0.7)):
        for n in (1, 2, 3):
            assert w.covariogram(np.zeros((1, n)), n, 2.0)[0] == pytest.approx(w.volume(n, 2.0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.0, 4.5))
def test_ball_covariogram_bounds(radius, t):
    v = geo.ball_covariogram(t, radius, 3)
    assert 0.0 <= v <= geo.unit_ball_volume(3) * radius**3 + 1e-12


def test_radius_laws():
    u = geo.UniformRadius(0.5, 1.5)
    assert u.moment(2) == pytest.approx((1.5**3 - 0.5**3) / 3)
    assert u.sup == 1.5
    c = geo.ConstantRadius(2.0)
    assert c.moment(3) == 8.0
    with pytest.raises(geo.GeometryError):
        geo.UniformRadius(1.0, 0.5)
