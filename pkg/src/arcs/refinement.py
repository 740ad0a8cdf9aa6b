"""Rotation refinement by Riemannian subgradient descent on unit quaternions.

Each pair ``(y_i, x_i)`` defines a positive semi-definite 4x4 form ``D_i``
with ``w^T D_i w = ||y_i - R(w) x_i||^2`` for every unit quaternion ``w``, so
minimizing the sum of residual norms over rotations becomes minimizing the
convex-in-w objective ``sum_i sqrt(w^T D_i w)`` over the unit sphere of R^4.
The descent iterates

    w <- normalize(w - step * tangent_subgradient(w))

with geometrically diminishing steps ``step_size * decay^t``. The objective
is scaled by ``1/l`` inside the solver (the minimizer is unchanged) so the
default step schedule is insensitive to the number of pairs.

Convergence to the ground truth is a local property: it requires enough
inliers for the minimum to be sharp and an initialization close to it. The
basin radius is not computable from data, so it is documented rather than
enforced; callers normally initialize from the consensus-stage rotation.

Sharpness diagnostics estimate the inlier margin (minimum of the inlier
average over the hyperplane orthogonal to the true quaternion) by sampling
plus local descent, and the outlier gain (maximum of the outlier average over
the whole sphere) by sampling plus local ascent. Both are one-sided: the
margin is estimated from above and the gain from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_pair_points, as_unit_quaternion, as_vector3

__all__ = [
    "residual_quadform",
    "residual_quadforms",
    "residual_sum",
    "riemannian_subgradient",
    "RefineConfig",
    "RefineHistory",
    "refine",
    "quat_distance",
    "SharpnessReport",
    "estimate_sharpness",
]

# wT D w terms at or below this are treated as nondifferentiable and
# contribute the zero subgradient (a valid element of the subdifferential).
_SMOOTH_EPS = 1e-18


def _coeff_tensor() -> np.ndarray:
    """Constant tensor T with C(y, x) = sum_{k,m} y_k x_m T[k, :, :, m].

    T[k, :, :, m] is the 4x4 coefficient of x_m in the quadratic form whose
    value at w is the k-th component of R(w) x.
    """
    T = np.zeros((3, 4, 4, 3))
    x1, x2, x3 = 0, 1, 2

    def fill(k, rows):
        for a in range(4):
            for b in range(4):
                coef, comp = rows[a][b]
                if coef:
                    T[k, a, b, comp] = coef

    z = (0.0, 0)
    fill(
        0,
        [
            [(1, x1), z, (1, x3), (-1, x2)],
            [z, (1, x1), (1, x2), (1, x3)],
            [(1, x3), (1, x2), (-1, x1), z],
            [(-1, x2), (1, x3), z, (-1, x1)],
        ],
    )
    fill(
        1,
        [
            [(1, x2), (-1, x3), z, (1, x1)],
            [(-1, x3), (-1, x2), (1, x1), z],
            [z, (1, x1), (1, x2), (1, x3)],
            [(1, x1), z, (1, x3), (-1, x2)],
        ],
    )
    fill(
        2,
        [
            [(1, x3), (1, x2), (-1, x1), z],
            [(1, x2), (-1, x3), z, (1, x1)],
            [(-1, x1), z, (-1, x3), (1, x2)],
            [z, (1, x1), (1, x2), (1, x3)],
        ],
    )
    return T


_COEFF = _coeff_tensor()


def residual_quadforms(y, x) -> np.ndarray:
    """Batch of symmetric PSD forms, shape (l, 4, 4).

    ``w^T D_i w`` equals the squared residual ``||y_i - R(w) x_i||^2`` of the
    rotation encoded by the unit quaternion ``w``. Each form is
    ``(||y||^2 + ||x||^2) I - 2 C`` with ``C`` bilinear in (y, x); for unit
    norm pairs its eigenvalues are 4, 4, 0, 0.
    """
    y, x = as_pair_points(y, x)
    C = np.einsum("lk,kabm,lm->lab", y, _COEFF, x)
    sq = np.einsum("ij,ij->i", y, y) + np.einsum("ij,ij->i", x, x)
    D = -2.0 * C
    D[:, np.arange(4), np.arange(4)] += sq[:, None]
    return D


def residual_quadform(y, x) -> np.ndarray:
    """Single 4x4 form for one pair; see :func:`residual_quadforms`."""
    y = as_vector3(y, "y")
    x = as_vector3(x, "x")
    return residual_quadforms(y.reshape(1, 3), x.reshape(1, 3))[0]


def _as_forms(Ds) -> np.ndarray:
    forms = np.asarray(Ds, dtype=np.float64)
    if forms.ndim == 2:
        forms = forms[None, :, :]
    if forms.ndim != 3 or forms.shape[1:] != (4, 4):
        raise ValueError(f"expected an (l, 4, 4) stack of forms, got shape {forms.shape}")
    if forms.shape[0] == 0:
        raise ValueError("need at least one form")
    return forms


def residual_sum(w, Ds) -> float:
    """Objective value ``sum_i sqrt(max(w^T D_i w, 0))``."""
    w = as_unit_quaternion(w)
    forms = _as_forms(Ds)
    q = np.einsum("a,lab,b->l", w, forms, w)
    return float(np.sqrt(np.maximum(q, 0.0)).sum())


def riemannian_subgradient(w, Ds) -> np.ndarray:
    """Tangent subgradient of the residual sum at ``w``.

    Sums ``D_i w / sqrt(w^T D_i w)`` over terms bounded away from zero
    (vanishing terms contribute the zero vector, a valid subgradient element)
    and projects onto the tangent space of the sphere, so the result is
    orthogonal to ``w``.
    """
    w = as_unit_quaternion(w)
    forms = _as_forms(Ds)
    return _subgradient_raw(w, forms)


def _subgradient_raw(w: np.ndarray, forms: np.ndarray) -> np.ndarray:
    Dw = forms @ w
    q = Dw @ w
    mask = q > _SMOOTH_EPS
    if not np.any(mask):
        return np.zeros(4)
    g = (Dw[mask] / np.sqrt(q[mask])[:, None]).sum(axis=0)
    return g - (w @ g) * w


@dataclass(frozen=True)
class RefineConfig:
    """Step schedule for the descent: ``step_size * decay**t``, t < max_iter.

    Stops early once the mean-scaled tangent subgradient times the current
    step drops below ``tol``.
    """

    step_size: float = 0.05
    decay: float = 0.92
    max_iter: int = 300
    tol: float = 1e-10

    def __post_init__(self):
        if self.step_size <= 0.0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if not 0.0 < self.decay < 1.0:
            raise ValueError(f"decay must lie in (0, 1), got {self.decay}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class RefineHistory:
    """Iterate trace: quaternions, objective values and step distances.

    ``iterates[t]`` is the t-th iterate starting from the initialization;
    ``objective[t]`` is the residual sum at ``iterates[t + 1]`` and
    ``moved[t]`` the distance between consecutive iterates.
    """

    iterates: np.ndarray
    objective: np.ndarray
    moved: np.ndarray


def refine(Ds, w0, config: RefineConfig | None = None) -> tuple[np.ndarray, RefineHistory]:
    """Descend the residual sum from ``w0`` on the quaternion sphere.

    Returns the final unit quaternion and the iterate history. Every iterate
    is exactly renormalized. The pre-normalization vector cannot vanish (a
    tangent step keeps the norm at least 1), which is asserted.
    """
    w = as_unit_quaternion(w0).copy()
    forms = _as_forms(Ds)
    cfg = config or RefineConfig()
    scale = 1.0 / forms.shape[0]

    iterates = [w.copy()]
    objective = []
    moved = []
    step = cfg.step_size
    for _ in range(cfg.max_iter):
        g = _subgradient_raw(w, forms) * scale
        gnorm = float(np.linalg.norm(g))
        if gnorm * step < cfg.tol:
            break
        raw = w - step * g
        raw_norm = float(np.linalg.norm(raw))
        if raw_norm < 0.5:
            raise RuntimeError(
                f"projection input collapsed (norm {raw_norm}); tangent steps keep norm >= 1"
            )
        w_next = raw / raw_norm
        moved.append(float(np.linalg.norm(w_next - w)))
        w = w_next
        iterates.append(w.copy())
        objective.append(residual_sum(w, forms))
        step *= cfg.decay
    history = RefineHistory(
        iterates=np.asarray(iterates),
        objective=np.asarray(objective),
        moved=np.asarray(moved),
    )
    return w, history


def quat_distance(w, w_ref) -> float:
    """Distance to the sign-ambiguous reference: min(||w - r||, ||w + r||)."""
    w = as_unit_quaternion(w, "w")
    w_ref = as_unit_quaternion(w_ref, "w_ref")
    return min(float(np.linalg.norm(w - w_ref)), float(np.linalg.norm(w + w_ref)))


def lipschitz_bound(Ds) -> float:
    """Diagnostic upper bound on the objective's Lipschitz constant.

    ``sum_i sqrt(lambda_max(D_i))`` bounds the gradient norm of the residual
    sum anywhere on the sphere. Useful for judging step sizes; not used by
    the solver itself.
    """
    forms = _as_forms(Ds)
    return float(np.sqrt(np.linalg.eigvalsh(forms)[:, -1]).sum())


@dataclass(frozen=True)
class SharpnessReport:
    """One-sided estimates of the sharpness constants.

    A minimum taken over sampled candidates can only overestimate the true
    minimum, so ``eta_min`` upper-bounds the true inlier margin; symmetrically
    ``eta_max`` lower-bounds the true outlier gain. The combination
    ``alpha = k eta_min / sqrt(2) - (l - k) eta_max`` is therefore an
    optimistic sharpness estimate: a negative value is conclusive evidence
    against sharpness, a positive one is supporting evidence only.
    """

    eta_min: float
    eta_max: float
    alpha: float
    n_samples: int


def _hyperplane_basis(w_true: np.ndarray) -> np.ndarray:
    """Orthonormal 4x3 basis of the hyperplane orthogonal to ``w_true``."""
    _, _, vt = np.linalg.svd(w_true.reshape(1, 4))
    return vt[1:].T


def _mean_residual(w: np.ndarray, forms: np.ndarray) -> float:
    q = np.einsum("a,lab,b->l", w, forms, w)
    return float(np.sqrt(np.maximum(q, 0.0)).mean())


def _local_search(forms, w_start, maximize, basis=None, steps=150):
    """Subgradient descent/ascent of the mean residual on a sphere.

    With ``basis`` given, the search is restricted to the unit sphere of that
    subspace (coordinates u, point = basis @ u). Uses a small geometric step
    schedule; returns the best value seen.
    """
    direction = 1.0 if maximize else -1.0
    if basis is None:
        u = w_start.copy()
        lift = np.eye(4)
    else:
        lift = basis
        u = lift.T @ w_start
        u /= np.linalg.norm(u)
    best = _mean_residual(lift @ u, forms)
    step = 0.05
    for _ in range(steps):
        w = lift @ u
        g = _subgradient_raw(w, forms) / forms.shape[0]
        gu = lift.T @ g
        gu -= (u @ gu) * u
        if np.linalg.norm(gu) < 1e-15:
            break
        u = u + direction * step * gu
        u /= np.linalg.norm(u)
        val = _mean_residual(lift @ u, forms)
        if (maximize and val > best) or (not maximize and val < best):
            best = val
        step *= 0.97
    return best


def estimate_sharpness(
    Ds,
    inliers,
    w_true,
    n_samples: int = 2000,
    seed: int = 0,
) -> SharpnessReport:
    """Monte-Carlo estimate of the sharpness constants of an instance.

    Args:
        Ds: (l, 4, 4) stack of residual forms.
        inliers: indices of the inlier forms; must be a nonempty proper
            subset of range(l).
        w_true: ground-truth unit quaternion.
        n_samples: random directions per side before local refinement.
        seed: RNG seed.
    """
    forms = _as_forms(Ds)
    w_true = as_unit_quaternion(w_true, "w_true")
    inliers = np.asarray(inliers, dtype=np.int64)
    total = forms.shape[0]
    if inliers.size == 0 or inliers.size >= total:
        raise ValueError("inliers must be a nonempty proper subset of the forms")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")

    outliers = np.setdiff1d(np.arange(total), inliers)
    in_forms = forms[inliers]
    out_forms = forms[outliers]
    rng = np.random.default_rng(seed)
    basis = _hyperplane_basis(w_true)

    # margin side: minimum of the inlier mean over the hyperplane sphere
    u = rng.normal(size=(n_samples, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    candidates = u @ basis.T
    vals = [_mean_residual(w, in_forms) for w in candidates]
    w_best = candidates[int(np.argmin(vals))]
    eta_min = _local_search(in_forms, w_best, maximize=False, basis=basis)

    # gain side: maximum of the outlier mean over the whole sphere
    s = rng.normal(size=(n_samples, 4))
    s /= np.linalg.norm(s, axis=1, keepdims=True)
    vals = [_mean_residual(w, out_forms) for w in s]
    w_best = s[int(np.argmax(vals))]
    eta_max = _local_search(out_forms, w_best, maximize=True)

    alpha = inliers.size * eta_min / math.sqrt(2.0) - outliers.size * eta_max
    return SharpnessReport(
        eta_min=float(eta_min),
        eta_max=float(eta_max),
        alpha=float(alpha),
        n_samples=int(n_samples),
    )
