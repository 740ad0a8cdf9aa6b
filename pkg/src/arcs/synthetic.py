"""Seeded synthetic problem instances and evaluation metrics.

Generators draw from numpy's PCG64 stream (recorded in benchmark reports) and
are pure functions of their parameters, so identical seeds give bitwise
identical instances regardless of platform or execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rotation import random_rotation

__all__ = [
    "RNG_ALGORITHM",
    "RrsInstance",
    "SrcsInstance",
    "gen_rrs",
    "gen_srcs",
    "gen_sharpness_instance",
    "success_rate",
    "trial_seed",
]

RNG_ALGORITHM = "numpy-pcg64"

NORM_GATE_SIGMA = 5.54
AXIS_GATE_SIGMA = 4.9


def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    """Per-trial seed derived from (master seed, trial index)."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _seed_token(seed):
    """Hashable echo of the seed: plain int, or (entropy, *spawn_key)."""
    if isinstance(seed, np.random.SeedSequence):
        key = tuple(int(v) for v in seed.spawn_key)
        entropy = int(seed.entropy)
        return (entropy, *key) if key else entropy
    return int(seed)


@dataclass(frozen=True)
class RrsInstance:
    """Paired-point rotation search instance with ground truth.

    ``y[i] = rotation @ x[i] + noise`` for inlier rows; outlier rows are
    independent Gaussian pairs, optionally rejection-sampled so their norm
    difference stays within the matching gate (making them indistinguishable
    by norms alone).
    """

    y: np.ndarray
    x: np.ndarray
    rotation: np.ndarray
    inliers: np.ndarray
    sigma: float
    seed: int | tuple[int, ...]
    norm_constrained: bool

    @property
    def n_pairs(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class SrcsInstance:
    """Two-cloud correspondence search instance with ground truth.

    ``correspondences`` holds the planted (i, j) pairs with
    ``q[i] = rotation @ p[j] + noise``; indices are distinct on both sides.
    """

    q: np.ndarray
    p: np.ndarray
    rotation: np.ndarray
    correspondences: np.ndarray
    sigma: float
    seed: int | tuple[int, ...]


def gen_rrs(
    n_pairs: int,
    n_inliers: int,
    sigma: float,
    seed: int = 0,
    norm_constrained: bool = False,
    rotation=None,
) -> RrsInstance:
    """Generate a robust rotation search instance.

    Args:
        n_pairs: total number of pairs l.
        n_inliers: planted inlier count, 1 <= n_inliers <= l.
        sigma: isotropic Gaussian noise scale (0 for noiseless).
        seed: RNG seed; fixed seed fixes the instance bitwise.
        norm_constrained: resample each outlier pair until
            ``| ||y|| - ||x|| | <= 5.54 sigma`` so norm screening cannot
            reject it.
        rotation: fix the ground-truth rotation instead of sampling it
            (used by sensitivity studies).
    """
    if not 1 <= n_inliers <= n_pairs:
        raise ValueError(f"need 1 <= n_inliers <= n_pairs, got {n_inliers}/{n_pairs}")
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = _rng(seed)
    sampled = random_rotation(rng)
    rotation = sampled if rotation is None else np.asarray(rotation, dtype=np.float64)

    x = rng.normal(size=(n_pairs, 3))
    y = np.empty_like(x)
    inliers = np.sort(rng.permutation(n_pairs)[:n_inliers])
    y[inliers] = x[inliers] @ rotation.T + sigma * rng.normal(size=(n_inliers, 3))

    outliers = np.setdiff1d(np.arange(n_pairs), inliers)
    y[outliers] = rng.normal(size=(outliers.size, 3))
    if norm_constrained and outliers.size:
        gate = NORM_GATE_SIGMA * sigma
        bad = outliers[
            np.abs(np.linalg.norm(y[outliers], axis=1) - np.linalg.norm(x[outliers], axis=1))
            > gate
        ]
        while bad.size:
            x[bad] = rng.normal(size=(bad.size, 3))
            y[bad] = rng.normal(size=(bad.size, 3))
            bad = bad[
                np.abs(np.linalg.norm(y[bad], axis=1) - np.linalg.norm(x[bad], axis=1)) > gate
            ]
    return RrsInstance(
        y=y,
        x=x,
        rotation=rotation,
        inliers=inliers,
        sigma=float(sigma),
        seed=_seed_token(seed),
        norm_constrained=bool(norm_constrained),
    )


def gen_srcs(m: int, n: int, n_inliers: int, sigma: float, seed: int = 0) -> SrcsInstance:
    """Generate a two-cloud correspondence search instance.

    Both clouds are standard Gaussian; ``n_inliers`` points of the smaller
    cloud are rotated (plus noise) and planted at distinct positions of the
    larger one. Requires ``n_inliers <= n <= m``.
    """
    if not 1 <= n_inliers <= n <= m:
        raise ValueError(f"need 1 <= n_inliers <= n <= m, got {n_inliers}/{n}/{m}")
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = _rng(seed)
    rotation = random_rotation(rng)

    p = rng.normal(size=(n, 3))
    q = rng.normal(size=(m, 3))
    i_idx = rng.permutation(m)[:n_inliers]
    j_idx = rng.permutation(n)[:n_inliers]
    q[i_idx] = p[j_idx] @ rotation.T + sigma * rng.normal(size=(n_inliers, 3))

    pairs = np.stack([i_idx, j_idx], axis=1).astype(np.int64)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return SrcsInstance(
        q=q,
        p=p,
        rotation=rotation,
        correspondences=pairs,
        sigma=float(sigma),
        seed=_seed_token(seed),
    )


def gen_sharpness_instance(n_pairs: int, n_inliers: int, seed: int = 0):
    """Instance of the random-root model used for sharpness diagnostics.

    Each measurement is a rank-2 form ``Z Z^T`` built from two independent
    unit-vector roots: inlier roots are uniform on the 2-sphere of the
    hyperplane orthogonal to the ground-truth quaternion (so the true
    quaternion has exactly zero residual), outlier roots are uniform on the
    whole quaternion sphere.

    Returns:
        ``(forms, inliers, w_true)`` with forms of shape (l, 4, 4).
    """
    if not 1 <= n_inliers <= n_pairs:
        raise ValueError(f"need 1 <= n_inliers <= n_pairs, got {n_inliers}/{n_pairs}")
    rng = _rng(seed)
    w_true = rng.normal(size=4)
    w_true /= np.linalg.norm(w_true)
    _, _, vt = np.linalg.svd(w_true.reshape(1, 4))
    basis = vt[1:].T

    forms = np.empty((n_pairs, 4, 4))
    inliers = np.sort(rng.permutation(n_pairs)[:n_inliers])
    mask = np.zeros(n_pairs, dtype=bool)
    mask[inliers] = True

    u = rng.normal(size=(n_inliers, 2, 3))
    u /= np.linalg.norm(u, axis=2, keepdims=True)
    roots_in = u @ basis.T
    forms[mask] = np.einsum("lca,lcb->lab", roots_in, roots_in)

    s = rng.normal(size=(n_pairs - n_inliers, 2, 4))
    s /= np.linalg.norm(s, axis=2, keepdims=True)
    forms[~mask] = np.einsum("lca,lcb->lab", s, s)
    return forms, inliers, w_true


def success_rate(errors, threshold: float = 10.0) -> float:
    """Fraction of rotation errors strictly below the threshold (degrees)."""
    if threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        raise ValueError("success rate of an empty error list is undefined")
    return float(np.count_nonzero(errors < threshold)) / errors.size
