"""Rotation representations, conversions and the SVD alignment solver.

Conventions used throughout the package:

- Rotation matrices are 3x3 with ``R.T @ R = I`` and ``det(R) = +1``.
- Quaternions are scalar-first unit 4-vectors ``[w1, w2, w3, w4]``; ``w`` and
  ``-w`` encode the same rotation, and canonical form has the first nonzero
  component positive.
- An axis is encoded by spherical angles ``theta in [0, pi]`` (polar) and
  ``phi in [0, pi]`` (azimuth restricted to the half-space ``b2 >= 0``), via
  ``b = [sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)]``.
- The rotation error metric is the geodesic angle between two rotations in
  degrees. No explicit metric is standard everywhere; the geodesic angle is
  the usual choice when errors are quoted in degrees.
"""

from __future__ import annotations

import math

import numpy as np

from ._validation import as_rotation_matrix, as_unit_axis, as_unit_quaternion
from .exceptions import DegenerateConfigurationError

__all__ = [
    "skew",
    "spherical_axis",
    "rodrigues",
    "quat_to_rotation",
    "rotation_to_quat",
    "rotation_error_deg",
    "kabsch",
    "random_rotation",
]


def skew(v) -> np.ndarray:
    """Skew-symmetric matrix [v]_x with [v]_x @ a = v x a."""
    x, y, z = np.asarray(v, dtype=np.float64).reshape(3)
    return np.array(
        [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]],
        dtype=np.float64,
    )


def spherical_axis(theta: float, phi: float) -> np.ndarray:
    """Unit axis from spherical angles, b2 >= 0 when phi in [0, pi]."""
    st = math.sin(theta)
    return np.array(
        [st * math.cos(phi), st * math.sin(phi), math.cos(theta)],
        dtype=np.float64,
    )


def rodrigues(axis, angle: float) -> np.ndarray:
    """Rotation by ``angle`` radians about a unit ``axis``.

    Computed as ``b b^T + [b]_x sin(angle) + (I - b b^T) cos(angle)``.

    Raises:
        ValueError: if the axis is not unit norm within 1e-9.
    """
    b = as_unit_axis(axis)
    outer = np.outer(b, b)
    return outer + skew(b) * math.sin(angle) + (np.eye(3) - outer) * math.cos(angle)


def quat_to_rotation(w) -> np.ndarray:
    """Rotation matrix of a scalar-first unit quaternion.

    ``quat_to_rotation(w) == quat_to_rotation(-w)`` since every entry is
    quadratic in the components.

    Raises:
        ValueError: if ``w`` is not unit norm within 1e-12.
    """
    w1, w2, w3, w4 = as_unit_quaternion(w)
    return np.array(
        [
            [
                w1 * w1 + w2 * w2 - w3 * w3 - w4 * w4,
                2.0 * (w2 * w3 - w1 * w4),
                2.0 * (w2 * w4 + w1 * w3),
            ],
            [
                2.0 * (w2 * w3 + w1 * w4),
                w1 * w1 + w3 * w3 - w2 * w2 - w4 * w4,
                2.0 * (w3 * w4 - w1 * w2),
            ],
            [
                2.0 * (w2 * w4 - w1 * w3),
                2.0 * (w3 * w4 + w1 * w2),
                w1 * w1 + w4 * w4 - w2 * w2 - w3 * w3,
            ],
        ],
        dtype=np.float64,
    )


def _canonical_sign(w: np.ndarray) -> np.ndarray:
    """Flip the quaternion sign so its first nonzero component is positive."""
    for c in w:
        if c != 0.0:
            return -w if c < 0.0 else w
    return w


def rotation_to_quat(R) -> np.ndarray:
    """Scalar-first unit quaternion of a rotation matrix, canonical sign.

    Inverse of :func:`quat_to_rotation` up to the +-w ambiguity; the returned
    quaternion has its first nonzero component positive. Uses the standard
    trace/largest-diagonal branching for numerical stability.

    Raises:
        ValueError: if ``R`` is not a rotation matrix within 1e-9.
    """
    R = as_rotation_matrix(R)
    t = float(np.trace(R))
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array(
            [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
        )
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array(
            [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array(
            [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
        )
    q = q / np.linalg.norm(q)
    return _canonical_sign(q)


def rotation_error_deg(R_est, R_true) -> float:
    """Geodesic angle between two rotations, in degrees, in [0, 180].

    The angle is ``arccos((trace(R_est^T R_true) - 1) / 2)``; the cosine is
    clamped to [-1, 1] because the floating-point trace can exceed the bounds
    by a few ulp. Evaluated as ``atan2(sin, cos)`` with the sine recovered
    from the skew part of the relative rotation: the raw arccos quantizes
    angles below ~2e-8 rad (one trace ulp) to zero-or-1e-6-degrees, while the
    hybrid stays accurate at both ends of [0, pi].
    """
    R_est = as_rotation_matrix(R_est, "R_est")
    R_true = as_rotation_matrix(R_true, "R_true")
    rel = R_est.T @ R_true
    cos_angle = (float(np.trace(rel)) - 1.0) / 2.0
    cos_angle = min(1.0, max(-1.0, cos_angle))
    sin_angle = 0.5 * math.sqrt(
        (rel[2, 1] - rel[1, 2]) ** 2
        + (rel[0, 2] - rel[2, 0]) ** 2
        + (rel[1, 0] - rel[0, 1]) ** 2
    )
    return math.degrees(math.atan2(sin_angle, cos_angle))


def kabsch(y, x) -> np.ndarray:
    """Rotation minimizing ``sum_i ||y_i - R x_i||^2`` over SO(3).

    Pure rotation alignment (no centroid removal, no translation): solved by
    the SVD of the cross-covariance ``sum_i y_i x_i^T`` with the usual
    determinant correction (flip the last singular vector when the raw
    product has negative determinant).

    Args:
        y: target points, shape (n, 3), n >= 2.
        x: source points, shape (n, 3); must span at least a 2D subspace.

    Raises:
        DegenerateConfigurationError: fewer than 2 pairs, or cross-covariance
            rank below 2 (second singular value <= 1e-9), e.g. all source
            points parallel.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != 3 or y.shape != x.shape:
        raise ValueError(f"expected matching (n, 3) arrays, got {y.shape} and {x.shape}")
    if y.shape[0] < 2:
        raise DegenerateConfigurationError(
            f"need at least 2 point pairs to determine a rotation, got {y.shape[0]}"
        )
    cross = y.T @ x
    U, S, Vt = np.linalg.svd(cross)
    if S[1] <= 1e-9:
        raise DegenerateConfigurationError(
            "cross-covariance is rank deficient (parallel or zero points); "
            f"singular values {S.tolist()}"
        )
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Rotation from an axis uniform on the sphere and an angle in [0, 2pi)."""
    axis = rng.normal(size=3)
    while np.linalg.norm(axis) < 1e-12:
        axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    return rodrigues(axis, angle)
