import math

import numpy as np
import pytest

from conftest import flat_system, sphere_rotations, sphere_system, two_rotations
from ifs_sync import cocycle as cc
from ifs_sync.diffeos import NoiseSpec, NorthSouthCircle, Rotation, SphereScale, evaluate
from ifs_sync.geometry import SPHERE, ManifoldMismatch, TangentFrame, distance, normalize
from ifs_sync.measures import uniform_points
from ifs_sync.rng import stream


def test_system_validation():
    with pytest.raises(ValueError):
        cc.FiniteIFS((Rotation(0.1),), [0.5, 0.5])
    with pytest.raises(ManifoldMismatch):
        cc.FiniteIFS((Rotation(0.1), SphereScale(0.5)), [0.5, 0.5])
    with pytest.raises(ValueError):
        cc.FiniteIFS((), [])


def test_iterate_word_examples():
    sys = flat_system()
    assert cc.iterate_word(sys, [], 0.3) == 0.3
    x = 0.37
    assert cc.iterate_word(sys, [0, 1], x) == pytest.approx(evaluate(sys.maps[1], evaluate(sys.maps[0], x)), abs=1e-15)
    r = two_rotations()
    assert cc.iterate_word(r, [0, 1, 1], 0.2) == pytest.approx(cc.iterate_word(r, [1, 0, 1], 0.2), abs=1e-14)
    with pytest.raises(ValueError):
        cc.iterate_word(sys, [0, 2], x)


def test_trajectory_examples():
    sys = cc.FiniteIFS((Rotation(0.3),), [1.0])
    assert cc.trajectory(sys, [], 0.1).tolist() == [0.1]
    traj = cc.trajectory(sys, [0] * 5, 0.1)
    assert all(distance(a, b) <= 1e-14 for a, b in zip(traj, (0.1 + 0.3 * np.arange(6)) % 1.0))
    w = flat_system().sample_word(50, stream(1))
    assert cc.trajectory(flat_system(), w, 0.2)[-1] == cc.iterate_word(flat_system(), w, 0.2)


def test_pullback_compose_examples():
    sys = flat_system()
    ens = stream(2).random(30)
    assert np.array_equal(cc.pullback_compose(sys, [], ens), ens)
    w = sys.sample_word(40, stream(3))
    single = cc.pullback_compose(sys, w, ens[:1])
    assert single[0] == pytest.approx(cc.iterate_word(sys, w, ens[0]), abs=1e-14)
    batch = cc.pullback_compose(sys, w, ens)
    assert np.allclose(batch, [cc.iterate_word(sys, w, x) for x in ens], atol=1e-13)


def test_pullback_contracts_to_attractor():
    sys = cc.FiniteIFS((NorthSouthCircle(-0.12),), [1.0])
    ens = 0.5 + (stream(4).random(100) - 0.5) * 0.9  # avoids the repeller at 1/2 only generically
    ens = ens[np.abs(ens - 0.5) > 1e-3]
    out = cc.pullback_compose(sys, np.zeros(200, dtype=int), ens)
    assert np.all([distance(x, 0.0) <= 1e-8 for x in out])


def test_sphere_pullback_matches_iterate():
    sys = sphere_system()
    ens = uniform_points(SPHERE, 10, stream(5))
    w = sys.sample_word(30, stream(6))
    batch = cc.pullback_compose(sys, w, ens)
    for x, y in zip(ens, batch):
        assert distance(cc.iterate_word(sys, w, x), y) <= 1e-12


def test_random_family_words_are_parameters():
    fam = cc.RandomFamily(NorthSouthCircle(-0.1), NoiseSpec("uniform", 0.2))
    w = fam.sample_word(10, stream(7))
    assert w.shape == (10,) and np.all(np.abs(w) <= 0.2)
    x = 0.3
    for a in w:
        x = (NorthSouthCircle(-0.1).lift(x) + a) % 1.0
    assert cc.iterate_word(fam, w, 0.3) == pytest.approx(x, abs=1e-13)
    sfam = cc.RandomFamily(SphereScale(0.8), NoiseSpec("uniform", 0.3))
    assert sfam.sample_word(4, stream(8)).shape == (4, 3)


def test_qr_positive():
    a = np.array([[-2.0, 1.0], [0.5, 3.0]])
    q, r = cc.qr_positive(a)
    assert np.allclose(q @ r, a) and np.all(np.diag(r) > 0)
    assert np.allclose(q.T @ q, np.eye(2))
    q1, r1 = cc.qr_positive(np.array([[-0.3]]))
    assert r1[0, 0] == 0.3 and q1[0, 0] == -1.0
    a3 = stream(9).normal(size=(3, 3))
    q3, r3 = cc.qr_positive(a3)
    assert np.allclose(q3 @ r3, a3) and np.all(np.diag(r3) > 0)


def test_circle_cocycle_is_sum_of_log_derivatives():
    sys = flat_system()
    w = sys.sample_word(500, stream(10))
    traj = cc.trajectory(sys, w, 0.4)
    expected = sum(math.log(abs(sys.maps[s].step_jacobian(x))) for s, x in zip(w, traj[:-1]))
    acc = cc.qr_cocycle(sys, w, 0.4)
    assert acc.log_sums[0] == pytest.approx(expected, rel=1e-12)
    assert acc.steps == 500


def test_sphere_rotations_have_zero_sums():
    sys = sphere_rotations()
    acc = cc.qr_cocycle(sys, sys.sample_word(2000, stream(11)), normalize(np.array([0.1, 0.2, 0.9])))
    assert np.all(np.abs(acc.log_sums) <= 1e-10)


def test_cocycle_property():
    sys = sphere_system()
    w = sys.sample_word(400, stream(12))
    x = normalize(np.array([0.3, -0.5, 0.2]))
    whole = cc.qr_cocycle(sys, w, x)
    split = cc.qr_cocycle(sys, w[:150], x).extend(sys, w[150:])
    assert np.allclose(whole.log_sums, split.log_sums, rtol=0, atol=1e-12)
    assert np.allclose(whole.frame.basis, split.frame.basis, atol=1e-10)
    assert whole.steps == split.steps == 400


def test_sphere_cocycle_matches_direct_product():
    sys = sphere_system()
    w = sys.sample_word(20, stream(13))
    x = normalize(np.array([0.3, -0.5, 0.2]))
    acc = cc.qr_cocycle(sys, w, x)
    # the product of tangent matrices has the same determinant as R
    frame = TangentFrame.canonical(x)
    prod = np.eye(2)
    from ifs_sync.diffeos import tangent

    for s in w:
        frame, m = tangent(sys.maps[s], frame)
        prod = m @ prod
    assert acc.log_sums.sum() == pytest.approx(math.log(abs(np.linalg.det(prod))), abs=1e-10)


def test_isometry_trajectories_keep_distance():
    sys = two_rotations()
    w = sys.sample_word(1000, stream(14))
    a, b = cc.trajectory(sys, w, 0.1), cc.trajectory(sys, w, 0.45)
    d = np.array([distance(x, y) for x, y in zip(a, b)])
    assert np.max(np.abs(d - 0.35)) <= 1e-10


def test_system_from_dict_round_trip():
    sys = sphere_system()
    again = cc.system_from_dict(sys.to_dict())
    assert again.p == sys.p and again.manifold == SPHERE
    fam = cc.RandomFamily(NorthSouthCircle(-0.1), NoiseSpec("triangular", 0.2))
    assert cc.system_from_dict(fam.to_dict()).noise == fam.noise


def test_manifold_checked_on_entry():
    with pytest.raises(ManifoldMismatch):
        cc.iterate_word(flat_system(), [0], np.array([0.0, 0.0, 1.0]))
