"""Estimator-style wrappers around the functional pipeline.

The classes follow scikit-learn conventions: constructor arguments are stored
verbatim (so ``get_params`` / ``set_params`` / ``clone`` work), ``fit``
computes trailing-underscore attributes and returns ``self``, and
``transform`` applies the estimated rotation to points. Noise thresholds can
be given either directly (``c``, ``cbar``) or through ``sigma`` using the
Gaussian gates ``c = 5.54 sigma`` and ``cbar = 4.9 sigma``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_pair_points, as_points
from .exceptions import DegenerateConfigurationError
from .consensus import prune
from .matching import arcs_match, arcs_n_match, arcs_solve
from .refinement import RefineConfig, refine, residual_quadforms
from .rotation import quat_to_rotation, rotation_to_quat
from .synthetic import AXIS_GATE_SIGMA, NORM_GATE_SIGMA

__all__ = [
    "NormMatcher",
    "ExactRotationSearch",
    "RobustRotationSearch",
    "RotationRefiner",
    "RotationCorrespondenceSearch",
]


def _resolve_thresholds(sigma, c, cbar) -> tuple[float, float]:
    if c is None:
        if sigma is None:
            raise ValueError("provide either sigma or an explicit threshold c")
        c = NORM_GATE_SIGMA * sigma
    if cbar is None:
        # same ratio as the two Gaussian gates, 4.9 / 5.54
        cbar = AXIS_GATE_SIGMA * sigma if sigma is not None else (AXIS_GATE_SIGMA / NORM_GATE_SIGMA) * c
    return float(c), float(cbar)


class NormMatcher(BaseEstimator):
    """Candidate correspondences between two clouds by norm proximity.

    Parameters:
        tolerance: norm difference threshold; None derives 5.54 * sigma.
        sigma: noise scale used when tolerance is None.
        all_pairs: emit every pair within tolerance (indices may repeat)
            instead of the greedy one-to-one matching.
    """

    def __init__(self, tolerance=None, sigma=None, all_pairs=False):
        self.tolerance = tolerance
        self.sigma = sigma
        self.all_pairs = all_pairs

    def fit(self, Q, P):
        Q = as_points(Q, "Q")
        P = as_points(P, "P")
        if self.tolerance is not None:
            tol = float(self.tolerance)
        elif self.sigma is not None:
            tol = NORM_GATE_SIGMA * float(self.sigma)
        else:
            tol = 0.0
        if self.all_pairs:
            self.correspondences_ = arcs_n_match(Q, P, tol)
        else:
            self.correspondences_ = arcs_match(Q, P, tol)
        self.n_candidates_ = int(self.correspondences_.shape[0])
        return self


class ExactRotationSearch(BaseEstimator):
    """Noiseless rotation and correspondence recovery from two clouds.

    Matches points of exactly equal norm (within floating-point slack, see
    ``tolerance``) and fits the rotation over all matches. Intended for
    noiseless clouds in general position with at least two overlapping,
    non-parallel points.
    """

    def __init__(self, tolerance=None):
        self.tolerance = tolerance

    def fit(self, Q, P):
        rotation, pairs = arcs_solve(Q, P, self.tolerance)
        self.rotation_ = rotation
        self.quaternion_ = rotation_to_quat(rotation)
        self.correspondences_ = pairs
        return self

    def transform(self, X):
        check_is_fitted(self)
        return as_points(X, "X") @ self.rotation_.T


class RobustRotationSearch(BaseEstimator):
    """Outlier-robust rotation between paired measurements.

    ``fit(X, Y)`` estimates the rotation with ``Y[i] ~= R @ X[i]`` for the
    inlier rows: consensus maximization over sampled axis azimuths selects a
    candidate rotation and inlier set, optionally refined by subgradient
    descent on the quaternion sphere over the consensus pairs.

    Parameters:
        sigma: noise scale; sets c and cbar unless given explicitly.
        c: residual threshold for consensus membership.
        cbar: axis-stage threshold.
        n_phi: azimuth sample count.
        refine: run the descent stage after pruning.
        step_size, decay, max_iter, tol: descent schedule.
        threads: worker threads for the pruning stage.
    """

    def __init__(
        self,
        sigma=None,
        c=None,
        cbar=None,
        n_phi=90,
        refine=True,
        step_size=0.05,
        decay=0.92,
        max_iter=300,
        tol=1e-10,
        threads=None,
    ):
        self.sigma = sigma
        self.c = c
        self.cbar = cbar
        self.n_phi = n_phi
        self.refine = refine
        self.step_size = step_size
        self.decay = decay
        self.max_iter = max_iter
        self.tol = tol
        self.threads = threads

    def fit(self, X, Y):
        Y, X = as_pair_points(Y, X)
        c, cbar = _resolve_thresholds(self.sigma, self.c, self.cbar)
        result = prune(Y, X, c=c, cbar=cbar, n_phi=self.n_phi, threads=self.threads)
        self.consensus_result_ = result
        self.inliers_ = result.consensus
        self.consensus_size_ = result.size
        self.rotation_ = result.rotation
        self.quaternion_ = rotation_to_quat(result.rotation)
        self.n_iter_ = 0
        if self.refine and result.size >= 1:
            forms = residual_quadforms(Y[result.consensus], X[result.consensus])
            cfg = RefineConfig(
                step_size=self.step_size,
                decay=self.decay,
                max_iter=self.max_iter,
                tol=self.tol,
            )
            w, history = refine(forms, self.quaternion_, cfg)
            self.quaternion_ = w
            self.rotation_ = quat_to_rotation(w)
            self.n_iter_ = int(history.moved.size)
        return self

    def transform(self, X):
        check_is_fitted(self)
        return as_points(X, "X") @ self.rotation_.T


class RotationRefiner(BaseEstimator):
    """Subgradient-descent rotation fit for mostly-inlier paired data.

    ``fit(X, Y, init_quaternion=...)`` descends the sum of residual norms on
    the quaternion sphere. The default initialization is the identity; pass
    the quaternion of a coarse estimate to refine it (convergence to the true
    rotation is only guaranteed near it).
    """

    def __init__(self, step_size=0.05, decay=0.92, max_iter=300, tol=1e-10):
        self.step_size = step_size
        self.decay = decay
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, Y, init_quaternion=None):
        Y, X = as_pair_points(Y, X)
        w0 = np.array([1.0, 0.0, 0.0, 0.0]) if init_quaternion is None else init_quaternion
        forms = residual_quadforms(Y, X)
        cfg = RefineConfig(
            step_size=self.step_size,
            decay=self.decay,
            max_iter=self.max_iter,
            tol=self.tol,
        )
        w, history = refine(forms, w0, cfg)
        self.quaternion_ = w
        self.rotation_ = quat_to_rotation(w)
        self.history_ = history
        self.n_iter_ = int(history.moved.size)
        return self

    def transform(self, X):
        check_is_fitted(self)
        return as_points(X, "X") @ self.rotation_.T


class RotationCorrespondenceSearch(BaseEstimator):
    """Full pipeline on two partially overlapping clouds.

    ``fit(Q, P)`` matches candidate correspondences by norm proximity, prunes
    them by consensus maximization, and refines the rotation on the surviving
    pairs. Fitted attributes expose the rotation mapping P onto Q, the
    candidate count and the consensus correspondence pairs.
    """

    def __init__(
        self,
        sigma=None,
        c=None,
        cbar=None,
        n_phi=90,
        refine=True,
        step_size=0.05,
        decay=0.92,
        max_iter=300,
        tol=1e-10,
        threads=None,
    ):
        self.sigma = sigma
        self.c = c
        self.cbar = cbar
        self.n_phi = n_phi
        self.refine = refine
        self.step_size = step_size
        self.decay = decay
        self.max_iter = max_iter
        self.tol = tol
        self.threads = threads

    def fit(self, Q, P):
        Q = as_points(Q, "Q")
        P = as_points(P, "P")
        c, cbar = _resolve_thresholds(self.sigma, self.c, self.cbar)
        candidates = arcs_n_match(Q, P, c)
        self.candidates_ = candidates
        self.n_candidates_ = int(candidates.shape[0])
        if candidates.shape[0] == 0:
            raise DegenerateConfigurationError(
                "no candidate correspondences within the norm gate"
            )

        searcher = RobustRotationSearch(
            c=c,
            cbar=cbar,
            n_phi=self.n_phi,
            refine=self.refine,
            step_size=self.step_size,
            decay=self.decay,
            max_iter=self.max_iter,
            tol=self.tol,
            threads=self.threads,
        )
        searcher.fit(P[candidates[:, 1]], Q[candidates[:, 0]])
        self.rotation_ = searcher.rotation_
        self.quaternion_ = searcher.quaternion_
        self.consensus_pairs_ = candidates[searcher.inliers_]
        self.consensus_size_ = searcher.consensus_size_
        self.n_iter_ = searcher.n_iter_
        return self

    def transform(self, P):
        check_is_fitted(self)
        return as_points(P, "P") @ self.rotation_.T
