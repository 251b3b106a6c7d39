"""Penalized functional PCA in B-spline coordinates.

The eigenproblem maximizes the sample variance of scores subject to
orthonormality in the penalized inner product, i.e. the matrix problem

    max_b (b' G S_A G b) / (b' (G + lam P) b),

solved through an upper-triangular factor T with T'T = G + lam P and a
symmetric eigendecomposition. T is computed by QR of the stacked matrix
[G^{1/2}; sqrt(lam) D] rather than by Cholesky of the assembled metric: at
large lam the assembled matrix loses the Gram part to rounding, while the
stacked factorization keeps orthonormality errors near sqrt(cond) * eps.

The L2-orthonormal eigenfunction coefficients come from the shared SVD
G^{1/2} T^{-1} = U s Vf', which gives B_beta = G^{-1/2} U Vf' V without ever
inverting the small singular values of the smoothing operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .basis import BasisExpansion, BasisSystem
from .errors import (
    DegenerateDataError,
    FactorizationError,
    InsufficientSampleError,
    InvalidConfigError,
    InvalidInputError,
    SingularSmootherError,
)

__all__ = [
    "FpcaModel",
    "SmoothingOperator",
    "penalized_fpca",
    "smoothing_half_power",
    "shrinkage_covariance",
    "reconstruct_curves",
]

# relative cutoff below which trailing eigenvalues are dropped: downstream
# whitening inverts the score covariance, so near-null directions are unusable
EIGENVALUE_RTOL = 1e-12


@dataclass
class FpcaModel:
    """Result of a penalized FPCA run.

    ``weight_coefs`` (columns ``b_{lam,j}``) are coefficients of the
    penalized weight functions, orthonormal in the (G + lam P) inner
    product. ``beta_coefs`` hold the L2-orthonormal eigenfunctions obtained
    by undoing one half power of the smoothing operator. ``scores`` are the
    sample scores ``Z = A G B_lam`` with variance ``eigenvalues`` (divisor n).
    """

    basis: BasisSystem
    lam: float
    q_max: int
    eigenvalues: np.ndarray
    weight_coefs: np.ndarray
    beta_coefs: np.ndarray
    scores: np.ndarray
    chol_L: np.ndarray
    shrink: bool = False
    shrink_intensity: float = 0.0

    @property
    def q(self) -> int:
        """Number of retained eigenpairs (may be below the requested q_max)."""
        return self.eigenvalues.size

    def variance_fraction(self, q: int) -> float:
        """Cumulative share of total retained variance in the first q pairs."""
        tot = float(self.eigenvalues.sum())
        return float(self.eigenvalues[:q].sum() / tot) if tot > 0 else 0.0


@dataclass
class SmoothingOperator:
    """Half powers of C = (G + lam P)^{-1} G in basis coordinates.

    Applying ``half_power`` to a coefficient vector smooths the function
    once (the operator S); applying it twice realizes S^2.
    """

    lam: float
    half_power: np.ndarray
    inverse_half_power: np.ndarray

    def smooth(self, coefs: np.ndarray) -> np.ndarray:
        return self.half_power @ coefs

    def unsmooth(self, coefs: np.ndarray) -> np.ndarray:
        return self.inverse_half_power @ coefs

    def smooth_twice(self, coefs: np.ndarray) -> np.ndarray:
        return self.half_power @ (self.half_power @ coefs)


def _gram_roots(basis: BasisSystem):
    """Symmetric square root and inverse square root of the Gram matrix."""
    w, Q = sla.eigh(basis.gram)
    if w[0] <= 0:
        raise FactorizationError("Gram matrix is not positive definite")
    s = np.sqrt(w)
    return (Q * s) @ Q.T, (Q / s) @ Q.T


def metric_factor(basis: BasisSystem, lam: float, g_half: np.ndarray | None = None) -> np.ndarray:
    """Upper-triangular T with T'T = G + lam * P, via QR of the stacked factor."""
    if lam < 0:
        raise InvalidConfigError(f"penalty parameter must be >= 0, got {lam}")
    if g_half is None:
        g_half, _ = _gram_roots(basis)
    if lam == 0.0:
        stack = g_half
    else:
        stack = np.vstack([g_half, np.sqrt(lam) * basis.diff])
    T = np.linalg.qr(stack, mode="r")
    d = np.sign(np.diag(T))
    if np.any(d == 0):
        raise FactorizationError("penalized metric is numerically singular")
    return T * d[:, None]


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry positive (first index wins)."""
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def penalized_fpca(
    expansion: BasisExpansion,
    lam: float,
    q_max: int,
    shrink: bool = False,
) -> FpcaModel:
    """Penalized FPCA of a basis expansion.

    Parameters
    ----------
    expansion : BasisExpansion
        Coefficient matrix A (centered expansions give the usual covariance).
    lam : float
        Penalty parameter, >= 0.
    q_max : int
        Upper bound on retained eigenpairs; clipped to the rank bound
        min(n - 1 if centered else n, p). Eigenvalues below
        ``EIGENVALUE_RTOL`` times the leading one are dropped.
    shrink : bool
        Replace the second-moment matrix A'A/n by the diagonal-target
        shrinkage estimate (rescaled to divisor n). Required reading when
        p exceeds n; the reported eigenvalues stay on the divisor-n scale.
    """
    if q_max < 1:
        raise InvalidConfigError(f"q_max must be >= 1, got {q_max}")
    A = expansion.coefs
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("coefficient matrix has non-finite entries")
    basis = expansion.basis
    n, p = A.shape
    rank_cap = min(n - 1 if expansion.centered else n, p)
    q_cap = max(1, min(q_max, rank_cap))

    g_half, g_mhalf = _gram_roots(basis)
    T = metric_factor(basis, lam, g_half)
    G = basis.gram
    # N = A G T^{-1}; its plain PCA is the penalized FPCA (scores Z = N V)
    N = sla.solve_triangular(T, (A @ G).T, lower=False, trans="T").T

    intensity = 0.0
    if shrink:
        S, intensity = shrinkage_covariance(A)
        Sigma = S * (n - 1.0) / n
        Y = sla.solve_triangular(T, G @ Sigma @ G, lower=False, trans="T")
        M = sla.solve_triangular(T, Y.T, lower=False, trans="T").T
    else:
        M = (N.T @ N) / n
    M = 0.5 * (M + M.T)

    w, V = sla.eigh(M)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    keep = w[:q_cap] > EIGENVALUE_RTOL * max(w[0], 0.0)
    if not np.any(keep):
        raise DegenerateDataError("no positive eigenvalues: data has no variation")
    w, V = w[:q_cap][keep], _fix_signs(V[:, :q_cap][:, keep])

    B_lam = sla.solve_triangular(T, V, lower=False)
    Z = N @ V
    F = sla.solve_triangular(T, g_half.T, lower=False, trans="T").T
    U, _, Vft = np.linalg.svd(F)
    B_beta = g_mhalf @ (U @ (Vft @ V))

    return FpcaModel(
        basis=basis,
        lam=float(lam),
        q_max=w.size,
        eigenvalues=w,
        weight_coefs=B_lam,
        beta_coefs=B_beta,
        scores=Z,
        chol_L=T.T,
        shrink=shrink,
        shrink_intensity=intensity,
    )


def smoothing_half_power(basis: BasisSystem, lam: float) -> SmoothingOperator:
    """Half powers of the smoothing operator C = (G + lam P)^{-1} G.

    Built from the SVD of F = G^{1/2} T^{-1}: the eigenvalues of the
    G-symmetrized operator are the squared singular values, so
    C^{1/2} = G^{-1/2} U s U' G^{1/2} without assembling the penalized
    metric. Raises :class:`SingularSmootherError` when a squared singular
    value falls below 1e-14 of the largest (the inverse half power would
    be meaningless).
    """
    g_half, g_mhalf = _gram_roots(basis)
    T = metric_factor(basis, lam, g_half)
    F = sla.solve_triangular(T, g_half.T, lower=False, trans="T").T
    U, s, _ = np.linalg.svd(F)
    lam_ev = s**2
    if lam_ev[-1] < 1e-14 * lam_ev[0]:
        raise SingularSmootherError(
            f"smoothing operator at lam={lam:g} has eigenvalue ratio "
            f"{lam_ev[-1] / lam_ev[0]:.2e} < 1e-14; inverse half power undefined"
        )
    half = g_mhalf @ (U * s) @ U.T @ g_half
    inv_half = g_mhalf @ (U / s) @ U.T @ g_half
    return SmoothingOperator(float(lam), half, inv_half)


def shrinkage_covariance(data: np.ndarray) -> tuple[np.ndarray, float]:
    """Diagonal-target shrinkage covariance with analytic intensity.

    Returns ``(1 - d) * S + d * diag(S)`` where S is the unbiased sample
    covariance and ``d`` is the analytic optimal intensity estimated from
    the variance of the sample correlations, clipped to [0, 1]. The result
    is positive definite whenever all diagonal entries of S are positive
    and d > 0, which covers the p > n regime.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise InvalidInputError("shrinkage covariance expects a 2d data matrix")
    n, p = X.shape
    if n < 3:
        raise InsufficientSampleError(f"need at least 3 observations, got {n}")
    if not np.any(X):
        raise DegenerateDataError("all-zero data matrix")
    Xc = X - X.mean(axis=0)
    S = (Xc.T @ Xc) / (n - 1.0)
    if p == 1:
        return S, 0.0
    var = np.diag(S)
    sd = np.sqrt(np.where(var > 0, var, 1.0))
    Xs = Xc / sd
    cross = Xs.T @ Xs
    r = cross / (n - 1.0)
    sum_w2 = (Xs**2).T @ (Xs**2)
    var_r = n / (n - 1.0) ** 3 * (sum_w2 - cross**2 / n)
    off = ~np.eye(p, dtype=bool)
    denom = float((r[off] ** 2).sum())
    delta = float(np.clip(var_r[off].sum() / denom, 0.0, 1.0)) if denom > 0 else 0.0
    out = (1.0 - delta) * S
    np.fill_diagonal(out, var)
    return out, delta


def reconstruct_curves(
    model: FpcaModel, expansion: BasisExpansion, q: int
) -> np.ndarray:
    """Coefficients of the q-term smoothed reconstruction of every curve.

    Returns ``Z[:, :q] @ B_beta[:, :q]'`` plus the stored mean when the
    expansion was centered.
    """
    if not 1 <= q <= model.q:
        raise InvalidConfigError(f"q must lie in 1..{model.q}, got {q}")
    rec = model.scores[:, :q] @ model.beta_coefs[:, :q].T
    if expansion.centered:
        rec = rec + expansion.mean_coefs
    return rec
