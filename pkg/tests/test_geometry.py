import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ifs_sync import geometry as geo

unit = st.floats(0.0, 1.0, exclude_max=True)
vec = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: sum(c * c for c in v) > 1e-3)


def test_circle_distance_examples():
    assert geo.distance(0.1, 0.9) == pytest.approx(0.2, abs=1e-15)
    assert geo.distance(0.3, 0.3) == 0.0
    assert geo.distance(0.0, 0.5) == 0.5


def test_antipodal_sphere_points():
    assert geo.distance(np.array([0, 0, 1.0]), np.array([0, 0, -1.0])) == pytest.approx(math.pi)


def test_manifold_mismatch():
    with pytest.raises(geo.ManifoldMismatch):
        geo.distance(0.1, np.array([1.0, 0, 0]))


def test_wrap_never_returns_one():
    assert geo.wrap(-1e-20) == 0.0
    assert geo.wrap(1.25) == 0.25
    assert np.all(geo.wrap(np.array([-1e-18, 0.999, 3.5])) < 1.0)


@given(unit, unit)
def test_circle_distance_is_symmetric_and_bounded(x, y):
    d = geo.distance(x, y)
    assert d == geo.distance(y, x)
    assert 0.0 <= d <= 0.5


@given(vec)
def test_sphere_frame_is_orthonormal_and_tangent(v):
    v = geo.normalize(np.array(v))
    f = geo.sphere_frame(v)
    assert np.allclose(f @ f.T, np.eye(2), atol=1e-12)
    assert np.allclose(f @ v, 0.0, atol=1e-12)


def test_sphere_frame_fallback_at_poles():
    for v in (np.array([0, 0, 1.0]), np.array([0, 0, -1.0])):
        f = geo.sphere_frame(v)
        assert np.allclose(f @ f.T, np.eye(2), atol=1e-14)
        assert np.allclose(f @ v, 0.0)
    # away from the poles the first vector is e3 x v normalized
    f = geo.sphere_frame(np.array([1.0, 0, 0]))
    assert np.allclose(f[0], [0, 1, 0])
    assert np.allclose(f[1], [0, 0, 1])


@given(vec, st.floats(-7, 7))
def test_rotation_is_orthogonal(axis, angle):
    aa = geo.normalize(np.array(axis)) * angle
    r = geo.rotation_matrix(aa)
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


def test_rotation_quarter_turn():
    r = geo.rotation_matrix(np.array([0, 0, math.pi / 2]))
    assert np.allclose(r @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_tangent_frame_canonical():
    f = geo.TangentFrame.canonical(0.3)
    assert f.manifold == geo.CIRCLE and f.basis.shape == (1, 1)
    g = geo.TangentFrame.canonical(np.array([0.0, 0.6, 0.8]))
    assert g.manifold == geo.SPHERE and g.is_orthonormal(1e-12)


def test_batch_distance_matches_scalar(rng):
    xs, ys = rng.random(50), rng.random(50)
    bd = geo.batch_distance(geo.CIRCLE, xs, ys)
    assert np.allclose(bd, [geo.distance(a, b) for a, b in zip(xs, ys)], atol=1e-15)
