"""Approximate consensus maximization over rotations via interval stabbing.

Given paired measurements ``(y_i, x_i)`` the goal is a rotation satisfying
``||y_i - R x_i|| <= c`` for as many pairs as possible. Exact maximization is
intractable, so the search factors through the axis-angle parameterization:

1. sample the azimuth ``phi`` on a fixed grid of ``[0, pi]``,
2. for each sample, stab the polar angle ``theta``: the constraint
   ``|v_i . b(theta, phi)| <= cbar`` with ``v_i = y_i - x_i`` confines
   ``theta`` to a union of at most two closed intervals,
3. with the resulting axis fixed, stab the rotation angle ``omega``: the
   residual constraint confines ``omega`` to closed arcs of ``[0, 2pi]``.

The candidate with the largest stage-3 consensus wins (ties go to the
smallest sample index). Cost is O(s * l log l) for s samples and l pairs.

Interval endpoints double as the returned coordinates, so consensus members
can sit exactly on their constraint boundary; feasibility checks should allow
a relative slack of a few 1e-12 for the trigonometric round trip.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import as_pair_points, as_unit_axis, as_vector3, resolve_threads
from .rotation import rodrigues, spherical_axis
from .stabbing import Interval, IntervalUnion, _stab_flat

__all__ = [
    "axis_intervals",
    "angle_intervals",
    "solve_theta_given_phi",
    "solve_omega_given_axis",
    "prune",
    "ConsensusResult",
    "residual_norms",
]

_DEGENERATE_AMP = 1e-12


@dataclass(frozen=True)
class ConsensusResult:
    """Best rotation hypothesis found by :func:`prune`.

    Attributes:
        rotation: 3x3 rotation built from the winning axis and angle.
        theta, phi: spherical angles of the winning axis, both in [0, pi].
        omega: winning rotation angle in [0, 2pi].
        consensus: sorted indices of pairs whose constraint arcs contain
            ``omega`` (residual within ``c`` up to boundary rounding).
        size: ``len(consensus)``.
    """

    rotation: np.ndarray
    theta: float
    phi: float
    omega: float
    consensus: np.ndarray
    size: int

    @property
    def axis(self) -> np.ndarray:
        return spherical_axis(self.theta, self.phi)


def residual_norms(y, x, rotation) -> np.ndarray:
    """Per-pair residuals ``||y_i - R x_i||``."""
    y, x = as_pair_points(y, x)
    return np.linalg.norm(y - x @ np.asarray(rotation, dtype=np.float64).T, axis=1)


def _axis_pieces(v: np.ndarray, phi: float, cbar: float, cols=None):
    """Flat (owners, lo, hi) arrays of theta intervals for each row of v.

    The constraint ``|v . b(theta, phi)| <= cbar`` rewrites as
    ``|cos(theta - center)| <= cbar / amp`` where ``amp`` and ``center`` are
    the amplitude and phase of ``planar*sin(theta) + axial*cos(theta)`` with
    ``planar = v1 cos(phi) + v2 sin(phi)`` and ``axial = v3`` (jointly negated
    if ``planar < 0``, which leaves the absolute value unchanged). When
    ``amp <= cbar`` the constraint is vacuous and one full piece [0, pi] is
    emitted; otherwise up to two disjoint pieces survive the clip to [0, pi].

    ``cols`` optionally carries the contiguous columns of v, precomputed once
    when many azimuth samples share the same measurements.
    """
    if cols is None:
        cols = (
            np.ascontiguousarray(v[:, 0]),
            np.ascontiguousarray(v[:, 1]),
            np.ascontiguousarray(v[:, 2]),
        )
    v0, v1, v2 = cols
    planar = v0 * math.cos(phi) + v1 * math.sin(phi)
    sign = np.where(planar < 0.0, -1.0, 1.0)
    planar *= sign
    axial = v2 * sign
    amp = np.hypot(planar, axial)
    vacuous = amp <= cbar

    def pieces(idx, planar_s, axial_s, amp_s):
        cos_bound = cbar / amp_s
        center = np.arctan2(planar_s, axial_s)
        inner = np.arccos(cos_bound)
        outer = math.pi - inner  # arccos(-cos_bound) up to 1 ulp
        # piece below the center: [center - outer, center - inner]
        lo1 = np.maximum(center - outer, 0.0)
        hi1 = center - inner
        keep1 = hi1 >= lo1
        # piece above the center: [center + inner, center + outer]
        lo2 = center + inner
        hi2 = np.minimum(center + outer, math.pi)
        keep2 = lo2 <= hi2
        return (
            [idx[keep1], idx[keep2]],
            [lo1[keep1], lo2[keep2]],
            [hi1[keep1], hi2[keep2]],
        )

    if not vacuous.any():
        owners_out, lo_out, hi_out = pieces(
            np.arange(v0.size, dtype=np.int64), planar, axial, amp
        )
    else:
        idx_vac = np.flatnonzero(vacuous)
        owners_out = [idx_vac]
        lo_out = [np.zeros(idx_vac.size)]
        hi_out = [np.full(idx_vac.size, math.pi)]
        idx = np.flatnonzero(~vacuous)
        if idx.size:
            o, l, h = pieces(idx, planar[idx], axial[idx], amp[idx])
            owners_out += o
            lo_out += l
            hi_out += h

    return (
        np.concatenate(owners_out).astype(np.int64, copy=False),
        np.concatenate(lo_out),
        np.concatenate(hi_out),
    )


def _angle_aux(y: np.ndarray, x: np.ndarray, c: float):
    """Azimuth-independent precomputation shared by all axis hypotheses."""
    cross_xy = np.cross(x, y)
    dot = np.einsum("ij,ij->i", y, x)
    half_gap = 0.5 * (
        np.einsum("ij,ij->i", y, y) + np.einsum("ij,ij->i", x, x) - c * c
    )
    return cross_xy, dot, half_gap


def _angle_pieces(y: np.ndarray, x: np.ndarray, b: np.ndarray, c: float, aux=None):
    """Flat (owners, lo, hi) arrays of omega intervals for each pair.

    With the axis fixed, ``y^T R x`` is ``axial_term + sin_coef*sin(omega) +
    cos_coef*cos(omega)``, so the residual constraint becomes
    ``cos(omega - center) >= threshold / amp``. The feasible set is an arc
    around ``center`` wrapped into [0, 2pi]: up to one wrapped piece joins the
    clipped central piece. Pairs with ``threshold > amp`` are infeasible for
    every omega and emit nothing; ``threshold <= -amp`` is vacuous and emits
    one full piece. If ``amp`` vanishes the constraint is omega-independent
    and resolves by the sign of ``threshold`` alone.
    """
    if aux is None:
        aux = _angle_aux(y, x, c)
    cross_xy, dot, half_gap = aux
    by = y @ b
    bx = x @ b
    axial_term = by * bx
    # y . (b x x) equals the triple product b . (x x y)
    sin_coef = cross_xy @ b
    cos_coef = dot - axial_term
    threshold = half_gap - axial_term
    amp = np.hypot(sin_coef, cos_coef)

    flat = amp < _DEGENERATE_AMP
    vacuous = np.where(flat, threshold <= 0.0, threshold <= -amp)
    feasible = ~flat & ~vacuous & (threshold <= amp)

    owners_out, lo_out, hi_out = [], [], []
    idx_vac = np.flatnonzero(vacuous)
    if idx_vac.size:
        owners_out.append(idx_vac)
        lo_out.append(np.zeros(idx_vac.size))
        hi_out.append(np.full(idx_vac.size, 2.0 * math.pi))

    idx = np.flatnonzero(feasible)
    if idx.size:
        two_pi = 2.0 * math.pi
        cos_bound = threshold[idx] / amp[idx]
        half = np.arccos(np.clip(cos_bound, -1.0, 1.0))
        center = np.arctan2(sin_coef[idx], cos_coef[idx])
        center = np.where(center < 0.0, center + two_pi, center)
        owners_out.append(idx)
        lo_out.append(np.maximum(center - half, 0.0))
        hi_out.append(np.minimum(center + half, two_pi))
        # wrapped remainders of the arc
        wrap_lo = center - half + two_pi
        keep_lo = wrap_lo <= two_pi
        owners_out.append(idx[keep_lo])
        lo_out.append(wrap_lo[keep_lo])
        hi_out.append(np.full(int(keep_lo.sum()), two_pi))
        wrap_hi = center + half - two_pi
        keep_hi = wrap_hi >= 0.0
        owners_out.append(idx[keep_hi])
        lo_out.append(np.zeros(int(keep_hi.sum())))
        hi_out.append(wrap_hi[keep_hi])

    if not owners_out:
        return (np.empty(0, np.int64), np.empty(0), np.empty(0))
    return (
        np.concatenate(owners_out).astype(np.int64, copy=False),
        np.concatenate(lo_out),
        np.concatenate(hi_out),
    )


def _union_from_pieces(owner, owners, lo, hi) -> IntervalUnion:
    comps = tuple(Interval(float(a), float(b)) for a, b in zip(lo, hi))
    return IntervalUnion(owner=owner, components=comps)


def axis_intervals(v, phi: float, cbar: float, owner: int = 0) -> IntervalUnion:
    """Feasible polar angles of one measurement for a fixed azimuth.

    Returns the set of ``theta in [0, pi]`` with
    ``|v . b(theta, phi)| <= cbar``. A vanishing ``v`` (norm below 1e-12)
    constrains nothing and yields the full interval.
    """
    v = as_vector3(v, "v")
    if not 0.0 <= phi <= math.pi:
        raise ValueError(f"phi must lie in [0, pi], got {phi}")
    if cbar <= 0.0:
        raise ValueError(f"cbar must be > 0, got {cbar}")
    if np.linalg.norm(v) < _DEGENERATE_AMP:
        return IntervalUnion(owner, (Interval(0.0, math.pi),))
    owners, lo, hi = _axis_pieces(v.reshape(1, 3), phi, cbar)
    return _union_from_pieces(owner, owners, lo, hi)


def angle_intervals(y, x, b, c: float, owner: int = 0) -> IntervalUnion:
    """Feasible rotation angles of one pair for a fixed axis.

    Returns the set of ``omega in [0, 2pi]`` with
    ``||y - R(b, omega) x|| <= c``; may be empty when no rotation about ``b``
    brings ``x`` within ``c`` of ``y``.
    """
    y = as_vector3(y, "y")
    x = as_vector3(x, "x")
    b = as_unit_axis(b)
    if c <= 0.0:
        raise ValueError(f"c must be > 0, got {c}")
    owners, lo, hi = _angle_pieces(y.reshape(1, 3), x.reshape(1, 3), b, c)
    return _union_from_pieces(owner, owners, lo, hi)


def solve_theta_given_phi(y, x, phi: float, cbar: float) -> tuple[float, np.ndarray]:
    """Stab the polar angle for a fixed azimuth.

    Returns ``(theta, consensus)``: the leftmost polar angle satisfying the
    axis constraint of the most pairs, and the sorted indices of those pairs.
    """
    y, x = as_pair_points(y, x)
    if not 0.0 <= phi <= math.pi:
        raise ValueError(f"phi must lie in [0, pi], got {phi}")
    if cbar <= 0.0:
        raise ValueError(f"cbar must be > 0, got {cbar}")
    owners, lo, hi = _axis_pieces(y - x, phi, cbar)
    theta, _, stabbed = _stab_flat(owners, lo, hi)
    return theta, stabbed


def solve_omega_given_axis(y, x, b, c: float) -> tuple[float, np.ndarray]:
    """Stab the rotation angle for a fixed axis.

    Returns ``(omega, consensus)``; ``(0.0, [])`` when every pair is
    infeasible about this axis.
    """
    y, x = as_pair_points(y, x)
    b = as_unit_axis(b)
    if c <= 0.0:
        raise ValueError(f"c must be > 0, got {c}")
    owners, lo, hi = _angle_pieces(y, x, b, c)
    omega, _, stabbed = _stab_flat(owners, lo, hi)
    return omega, stabbed


def _evaluate_phi(cols, aux, y, x, phi, c, cbar):
    """One azimuth sample: stab theta, then stab omega about the axis."""
    owners, lo, hi = _axis_pieces(None, phi, cbar, cols=cols)
    theta, _, _ = _stab_flat(owners, lo, hi, want_members=False)
    b = spherical_axis(theta, phi)
    owners, lo, hi = _angle_pieces(y, x, b, c, aux=aux)
    if lo.size == 0:
        return 0, theta, 0.0
    omega, count, _ = _stab_flat(owners, lo, hi, want_members=False)
    return count, theta, omega


def prune(
    y,
    x,
    c: float,
    cbar: float,
    n_phi: int = 90,
    threads: int | None = None,
) -> ConsensusResult:
    """Approximate consensus maximization over all rotations.

    Args:
        y, x: paired measurements, each shape (l, 3), l >= 1.
        c: residual threshold for consensus membership.
        cbar: axis-stage threshold on ``|v_i . b|``.
        n_phi: number of azimuth samples ``phi_j = (2j-1) pi / (2 n_phi)``.
        threads: worker threads across azimuth samples; default resolves the
            ARCS_THREADS environment variable, else 1. The result does not
            depend on the thread count.

    Returns:
        :class:`ConsensusResult` for the sample with the largest stage-3
        consensus, ties resolved toward the smallest sample index.
    """
    y, x = as_pair_points(y, x)
    if y.shape[0] < 1:
        raise ValueError("need at least one pair")
    if c <= 0.0 or cbar <= 0.0:
        raise ValueError(f"thresholds must be > 0, got c={c}, cbar={cbar}")
    if n_phi < 1:
        raise ValueError(f"n_phi must be >= 1, got {n_phi}")
    workers = resolve_threads(threads)

    v = y - x
    cols = (
        np.ascontiguousarray(v[:, 0]),
        np.ascontiguousarray(v[:, 1]),
        np.ascontiguousarray(v[:, 2]),
    )
    aux = _angle_aux(y, x, c)
    phis = [(2 * j - 1) * math.pi / (2 * n_phi) for j in range(1, n_phi + 1)]

    if workers == 1:
        outcomes = [_evaluate_phi(cols, aux, y, x, phi, c, cbar) for phi in phis]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(lambda phi: _evaluate_phi(cols, aux, y, x, phi, c, cbar), phis)
            )

    best_j = 0
    for j in range(1, n_phi):
        if outcomes[j][0] > outcomes[best_j][0]:
            best_j = j
    count, theta, omega = outcomes[best_j]
    phi = phis[best_j]
    b = spherical_axis(theta, phi)
    if count == 0:
        consensus = np.empty(0, dtype=np.int64)
    else:
        owners, lo, hi = _angle_pieces(y, x, b, c, aux=aux)
        mask = (lo <= omega) & (omega <= hi)
        consensus = np.unique(owners[mask])
    return ConsensusResult(
        rotation=rodrigues(b, omega),
        theta=float(theta),
        phi=float(phi),
        omega=float(omega),
        consensus=consensus,
        size=int(consensus.size),
    )
