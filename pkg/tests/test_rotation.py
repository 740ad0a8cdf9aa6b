import math

import numpy as np
import pytest

from arcs import (
    DegenerateConfigurationError,
    kabsch,
    quat_to_rotation,
    random_rotation,
    rodrigues,
    rotation_error_deg,
    rotation_to_quat,
    spherical_axis,
)


def test_rodrigues_quarter_turn_about_z():
    R = rodrigues([0.0, 0.0, 1.0], math.pi / 2)
    np.testing.assert_allclose(R @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-12)


@pytest.mark.parametrize("axis", [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0.6, 0.8, 0.0]])
def test_rodrigues_zero_angle_is_identity(axis):
    np.testing.assert_allclose(rodrigues(axis, 0.0), np.eye(3), atol=1e-15)


def test_rodrigues_half_turn_about_x():
    np.testing.assert_allclose(
        rodrigues([1.0, 0.0, 0.0], math.pi), np.diag([1.0, -1.0, -1.0]), atol=1e-15
    )


def test_rodrigues_rejects_non_unit_axis():
    with pytest.raises(ValueError):
        rodrigues([1.0, 1.0, 0.0], 0.3)


def test_quat_identity():
    np.testing.assert_allclose(quat_to_rotation([1, 0, 0, 0]), np.eye(3), atol=1e-15)


def test_quat_last_component():
    np.testing.assert_allclose(
        quat_to_rotation([0, 0, 0, 1]), np.diag([-1.0, -1.0, 1.0]), atol=1e-15
    )


def test_quat_rejects_non_unit():
    with pytest.raises(ValueError):
        quat_to_rotation([1.0, 0.1, 0.0, 0.0])


def test_quat_sign_symmetry_and_orthogonality():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        w = rng.normal(size=4)
        w /= np.linalg.norm(w)
        R = quat_to_rotation(w)
        np.testing.assert_array_equal(R, quat_to_rotation(-w))
        assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-9
        assert abs(np.linalg.det(R) - 1.0) < 1e-9


def test_quat_agrees_with_rodrigues():
    rng = np.random.default_rng(11)
    for _ in range(300):
        b = rng.normal(size=3)
        b /= np.linalg.norm(b)
        omega = rng.uniform(0, 2 * math.pi)
        w = np.concatenate(([math.cos(omega / 2)], math.sin(omega / 2) * b))
        np.testing.assert_allclose(quat_to_rotation(w), rodrigues(b, omega), atol=1e-9)


def test_rotation_to_quat_identity():
    np.testing.assert_allclose(rotation_to_quat(np.eye(3)), [1, 0, 0, 0], atol=1e-15)


def test_rotation_to_quat_canonical_sign():
    w = rotation_to_quat(np.diag([-1.0, -1.0, 1.0]))
    np.testing.assert_allclose(w, [0, 0, 0, 1], atol=1e-12)
    # first nonzero component positive on random rotations
    rng = np.random.default_rng(3)
    for _ in range(200):
        q = rotation_to_quat(random_rotation(rng))
        nz = q[np.abs(q) > 0]
        assert nz[0] > 0


def test_rotation_to_quat_round_trip():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        R = random_rotation(rng)
        worst = max(worst, np.max(np.abs(quat_to_rotation(rotation_to_quat(R)) - R)))
    assert worst < 1e-9


def test_rotation_to_quat_rejects_non_rotation():
    with pytest.raises(ValueError):
        rotation_to_quat(np.diag([1.0, 1.0, 2.0]))
    with pytest.raises(ValueError):
        rotation_to_quat(np.diag([1.0, 1.0, -1.0]))  # det -1


def test_error_zero_on_equal():
    rng = np.random.default_rng(1)
    R = random_rotation(rng)
    assert rotation_error_deg(R, R) == 0.0


def test_error_quarter_turn():
    assert abs(rotation_error_deg(np.eye(3), rodrigues([0, 0, 1], math.pi / 2)) - 90.0) < 1e-9


@pytest.mark.parametrize("axis", [[1, 0, 0], [0, 0, 1], [0.36, 0.48, 0.8]])
def test_error_small_angle_equals_rotation_angle(axis):
    got = rotation_error_deg(np.eye(3), rodrigues(axis, 0.1))
    assert abs(got - math.degrees(0.1)) < 1e-9


def test_error_symmetric_triangle_and_range():
    rng = np.random.default_rng(2)
    for _ in range(500):
        A, B, C = (random_rotation(rng) for _ in range(3))
        ab = rotation_error_deg(A, B)
        assert 0.0 <= ab <= 180.0
        assert abs(ab - rotation_error_deg(B, A)) < 1e-6
        assert ab <= rotation_error_deg(A, C) + rotation_error_deg(C, B) + 1e-6


def test_kabsch_exact_two_pairs():
    rng = np.random.default_rng(4)
    for _ in range(100):
        R = random_rotation(rng)
        x = rng.normal(size=(2, 3))
        got = kabsch(x @ R.T, x)
        assert np.max(np.abs(got - R)) < 1e-9


def test_kabsch_identity_on_equal_points():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(5, 3))
    np.testing.assert_allclose(kabsch(x, x), np.eye(3), atol=1e-12)


def test_kabsch_many_noiseless_pairs():
    rng = np.random.default_rng(12)
    for _ in range(20):
        R = random_rotation(rng)
        x = rng.normal(size=(100, 3))
        assert rotation_error_deg(kabsch(x @ R.T, x), R) < 1e-8


def test_kabsch_pair_order_invariance():
    rng = np.random.default_rng(13)
    R = random_rotation(rng)
    x = rng.normal(size=(20, 3))
    y = x @ R.T + 0.01 * rng.normal(size=(20, 3))
    perm = rng.permutation(20)
    np.testing.assert_allclose(kabsch(y, x), kabsch(y[perm], x[perm]), atol=1e-12)


def test_kabsch_degenerate_inputs():
    with pytest.raises(DegenerateConfigurationError):
        kabsch(np.ones((1, 3)), np.ones((1, 3)))
    # parallel source points: rank-1 cross covariance
    x = np.array([[1.0, 0, 0], [2.0, 0, 0], [3.0, 0, 0]])
    with pytest.raises(DegenerateConfigurationError):
        kabsch(x, x)


def test_spherical_axis_upper_half():
    rng = np.random.default_rng(21)
    for _ in range(200):
        theta = rng.uniform(0, math.pi)
        phi = rng.uniform(0, math.pi)
        b = spherical_axis(theta, phi)
        assert abs(np.linalg.norm(b) - 1.0) < 1e-12
        assert b[1] > -1e-15
