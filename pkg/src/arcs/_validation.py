"""Input validation helpers used by the functional core and the estimators."""

from __future__ import annotations

import os

import numpy as np

ROTATION_TOL = 1e-9
UNIT_QUAT_TOL = 1e-12
UNIT_AXIS_TOL = 1e-9


def as_points(a, name: str = "points") -> np.ndarray:
    """Coerce input to a float64 array of shape (n, 3) with finite entries."""
    pts = np.asarray(a, dtype=np.float64)
    if pts.ndim == 1 and pts.size == 0:
        return pts.reshape(0, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return pts


def as_vector3(a, name: str = "vector") -> np.ndarray:
    v = np.asarray(a, dtype=np.float64).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_pair_points(y, x) -> tuple[np.ndarray, np.ndarray]:
    """Validate two equally sized (n, 3) arrays of paired measurements."""
    y = as_points(y, "y")
    x = as_points(x, "x")
    if y.shape[0] != x.shape[0]:
        raise ValueError(
            f"paired point arrays must have equal length, got {y.shape[0]} and {x.shape[0]}"
        )
    return y, x


def as_unit_axis(b, name: str = "axis") -> np.ndarray:
    b = as_vector3(b, name)
    norm = float(np.linalg.norm(b))
    if abs(norm - 1.0) > UNIT_AXIS_TOL:
        raise ValueError(f"{name} must be a unit vector, got norm {norm!r}")
    return b


def as_unit_quaternion(w, name: str = "quaternion") -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if w.shape != (4,):
        raise ValueError(f"{name} must have 4 components, got shape {w.shape}")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > UNIT_QUAT_TOL:
        raise ValueError(f"{name} must be a unit 4-vector, got norm {norm!r}")
    return w


def as_rotation_matrix(R, name: str = "rotation") -> np.ndarray:
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3):
        raise ValueError(f"{name} must be a 3x3 matrix, got shape {R.shape}")
    if np.max(np.abs(R.T @ R - np.eye(3))) > ROTATION_TOL:
        raise ValueError(f"{name} is not orthogonal within {ROTATION_TOL}")
    if abs(float(np.linalg.det(R)) - 1.0) > ROTATION_TOL:
        raise ValueError(f"{name} must have determinant +1")
    return R


def resolve_threads(threads: int | None) -> int:
    """Resolve a worker count: explicit value, else ARCS_THREADS, else 1."""
    if threads is not None:
        n = int(threads)
    else:
        env = os.environ.get("ARCS_THREADS", "")
        n = int(env) if env.strip() else 1
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    return n
