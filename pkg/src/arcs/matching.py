"""Matching point sets by Euclidean norm.

Two flavours operate on norm-sorted clouds:

- :func:`arcs_match` walks both sorted clouds with monotone cursors and
  greedily pairs points whose norms differ by at most ``c``, advancing both
  cursors on a match. The output is a partial matching (no index repeats).
- :func:`arcs_n_match` enumerates every pair within the norm window, allowing
  repeats; each sorted source norm sweeps a contiguous window of the other
  sorted cloud, so the cost is O(l + m log m) for l emitted pairs.

Pairs are reported in the original (pre-sort) index space, 0-based, in
lexicographic order. Enumeration order inside the window scan is an
implementation detail; only the emitted set is contractual.
"""

from __future__ import annotations

import numpy as np

from ._validation import as_points
from .exceptions import DegenerateConfigurationError
from .rotation import kabsch

__all__ = ["arcs_match", "arcs_n_match", "arcs_solve"]

_EMPTY_PAIRS = np.empty((0, 2), dtype=np.int64)


def _sorted_norms(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(points, axis=1)
    order = np.argsort(norms, kind="stable")
    return norms[order], order


def arcs_match(q_points, p_points, tolerance: float = 0.0) -> np.ndarray:
    """Greedy one-to-one matching of near-equal norms.

    Args:
        q_points: larger cloud, shape (m, 3).
        p_points: smaller cloud, shape (n, 3).
        tolerance: norm difference threshold c >= 0; 0 requires exact
            floating-point equality.

    Returns:
        Array of index pairs (i, j), shape (k, 2), original indices,
        sorted lexicographically. No index repeats on either side.
    """
    q_points = as_points(q_points, "q_points")
    p_points = as_points(p_points, "p_points")
    if tolerance < 0.0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    if q_points.shape[0] == 0 or p_points.shape[0] == 0:
        return _EMPTY_PAIRS.copy()

    q_norms, q_order = _sorted_norms(q_points)
    p_norms, p_order = _sorted_norms(p_points)
    nq = q_norms.tolist()
    np_ = p_norms.tolist()
    m, n = len(nq), len(np_)

    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < m and j < n:
        d = nq[i] - np_[j]
        if d > tolerance:
            j += 1
        elif d < -tolerance:
            i += 1
        else:
            pairs.append((q_order[i], p_order[j]))
            i += 1
            j += 1
    if not pairs:
        return _EMPTY_PAIRS.copy()
    out = np.asarray(pairs, dtype=np.int64)
    return out[np.lexsort((out[:, 1], out[:, 0]))]


def arcs_n_match(q_points, p_points, tolerance: float) -> np.ndarray:
    """All pairs whose norms differ by at most ``tolerance``.

    Unlike :func:`arcs_match` indices may repeat: every (i, j) with
    ``|norm(q_i) - norm(p_j)| <= tolerance`` is emitted. Each sorted q-norm
    selects the contiguous window of sorted p-norms inside
    ``[q - tolerance, q + tolerance]``.

    Returns:
        Array of index pairs, shape (l, 2), original indices, lexicographic.
    """
    q_points = as_points(q_points, "q_points")
    p_points = as_points(p_points, "p_points")
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    if q_points.shape[0] == 0 or p_points.shape[0] == 0:
        return _EMPTY_PAIRS.copy()

    q_norms = np.linalg.norm(q_points, axis=1)
    p_norms, p_order = _sorted_norms(p_points)
    # windows widened by a few ulp, then filtered by the exact per-pair test,
    # so rounding of (norm +- tolerance) cannot flip boundary cases
    slack = 4.0 * np.finfo(np.float64).eps * (np.abs(q_norms) + tolerance)
    window_lo = np.searchsorted(p_norms, q_norms - tolerance - slack, side="left")
    window_hi = np.searchsorted(p_norms, q_norms + tolerance + slack, side="right")
    counts = window_hi - window_lo
    total = int(counts.sum())
    if total == 0:
        return _EMPTY_PAIRS.copy()

    i_idx = np.repeat(np.arange(q_norms.size, dtype=np.int64), counts)
    # positions within each window: global arange minus each window's offset
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    within = np.arange(total, dtype=np.int64) - np.repeat(offsets, counts)
    j_sorted = np.repeat(window_lo, counts) + within
    keep = np.abs(q_norms[i_idx] - p_norms[j_sorted]) <= tolerance
    i_idx = i_idx[keep]
    j_idx = p_order[j_sorted[keep]]
    if i_idx.size == 0:
        return _EMPTY_PAIRS.copy()

    out = np.empty((i_idx.size, 2), dtype=np.int64)
    out[:, 0] = i_idx
    out[:, 1] = j_idx
    return out[np.lexsort((out[:, 1], out[:, 0]))]


def arcs_solve(q_points, p_points, tolerance: float | None = None):
    """Noiseless rotation and correspondence recovery.

    Matches with :func:`arcs_match` and fits the rotation over all matched
    pairs. ``tolerance=None`` picks ``64 * eps * max_norm``: in exact
    arithmetic the threshold would be zero, but rotating a point perturbs its
    floating-point norm by a few ulp, so exact recovery on numerically
    generated data needs this hair of slack. It is far below any plausible
    norm gap between unrelated points.

    Returns:
        ``(rotation, pairs)`` where ``rotation`` maps p-points onto q-points
        (``q_i ~= R p_j``) and ``pairs`` is the matched correspondence array.

    Raises:
        DegenerateConfigurationError: fewer than 2 matches, or matched
            source points all parallel.
    """
    q_points = as_points(q_points, "q_points")
    p_points = as_points(p_points, "p_points")
    if tolerance is None:
        scale = 0.0
        if q_points.size:
            scale = max(scale, float(np.max(np.abs(q_points))) * np.sqrt(3.0))
        if p_points.size:
            scale = max(scale, float(np.max(np.abs(p_points))) * np.sqrt(3.0))
        tolerance = 64.0 * np.finfo(np.float64).eps * scale
    pairs = arcs_match(q_points, p_points, tolerance)
    if pairs.shape[0] < 2:
        raise DegenerateConfigurationError(
            f"found {pairs.shape[0]} norm matches; at least 2 non-parallel pairs are required"
        )
    R = kabsch(q_points[pairs[:, 0]], p_points[pairs[:, 1]])
    return R, pairs
