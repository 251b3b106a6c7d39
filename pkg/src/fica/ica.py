"""Kurtosis-based independent components of retained FPCA scores.

Whitened scores are rotated by the eigenvectors of the fourth-moment
(kurtosis) matrix; the rotation carries over to the L2-orthonormal
eigenfunctions, giving independent weight functions and per-curve
component scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisExpansion, BasisSystem
from .errors import InvalidInputError, WhiteningSingularError
from .fpca import FpcaModel, _fix_signs

__all__ = [
    "FicaModel",
    "whiten",
    "kurtosis_matrix",
    "kurtosis_eigen",
    "build_fica",
    "gamma_transform",
]


@dataclass
class FicaModel:
    """Kurtosis-rotation layer on top of a fitted FPCA model.

    ``psi_coefs`` holds B-spline coefficients of the independent weight
    functions (orthonormal in L2); ``component_scores`` are projections of
    the sample curves onto them; ``white_component_scores`` are the rotated
    whitened scores kept for diagnostics.
    """

    basis: BasisSystem
    q: int
    whitener: np.ndarray
    white_scores: np.ndarray
    kurtosis_eigenvalues: np.ndarray
    rotation: np.ndarray
    psi_coefs: np.ndarray
    component_scores: np.ndarray
    white_component_scores: np.ndarray

    @property
    def gaussian_reference(self) -> float:
        """Kurtosis eigenvalue of an exactly Gaussian component, q + 2."""
        return float(self.q + 2)

    def extreme_order(self) -> np.ndarray:
        """Component indices sorted by distance of rho from the Gaussian q+2."""
        return np.argsort(-np.abs(self.kurtosis_eigenvalues - self.gaussian_reference), kind="stable")


def whiten(scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Whiten scores with the symmetric inverse square root of Z'Z / n.

    Returns ``(white_scores, whitener)`` where ``whitener`` is
    ``sqrt(n) (Z'Z)^{-1/2}`` so that the whitened scores satisfy
    ``Z~'Z~ / n = I``.
    """
    Z = np.asarray(scores, dtype=float)
    if Z.ndim != 2:
        raise InvalidInputError("score matrix must be 2-dimensional")
    n = Z.shape[0]
    w, Q = np.linalg.eigh(Z.T @ Z)
    if w[0] <= 1e-12 * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise WhiteningSingularError(
            "score covariance is rank deficient; reduce the number of components"
        )
    whitener = np.sqrt(n) * (Q / np.sqrt(w)) @ Q.T
    return Z @ whitener, whitener


def kurtosis_matrix(white_scores: np.ndarray) -> np.ndarray:
    """Fourth-moment matrix of whitened scores, n^{-1} sum |z|^2 z z'.

    The result is exactly symmetric; its trace is the mean fourth power of
    the row norms. For white Gaussian rows it concentrates at (q + 2) I.
    """
    Zt = np.asarray(white_scores, dtype=float)
    if Zt.ndim != 2:
        raise InvalidInputError("white score matrix must be 2-dimensional")
    if not np.all(np.isfinite(Zt)):
        raise InvalidInputError("white score matrix has non-finite entries")
    n = Zt.shape[0]
    nrm2 = (Zt**2).sum(axis=1)
    K = (Zt * nrm2[:, None]).T @ Zt / n
    return 0.5 * (K + K.T)


def kurtosis_eigen(kurt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition with descending eigenvalues.

    Column signs are fixed so the largest-magnitude entry of each
    eigenvector is positive; equal eigenvalues keep their input order.
    """
    K = np.asarray(kurt, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidInputError("kurtosis matrix must be square")
    if np.abs(K - K.T).max() > 1e-10:
        raise InvalidInputError("kurtosis matrix is not symmetric")
    w, V = np.linalg.eigh(K)
    order = np.argsort(-w, kind="stable")
    return w[order], _fix_signs(V[:, order])


def build_fica(
    model: FpcaModel,
    expansion: BasisExpansion,
    q: int,
    include_mean: bool = False,
) -> FicaModel:
    """Chain whitening, kurtosis eigenanalysis and the function-space maps.

    Component scores project the sample curves onto the independent weight
    functions; by default the centered curves are used (the model was fit
    on centered data), ``include_mean`` restores the stored mean first.
    """
    if not 1 <= q <= model.q:
        raise InvalidInputError(f"q must lie in 1..{model.q}, got {q}")
    Z = model.scores[:, :q]
    white, whitener = whiten(Z)
    rho, U = kurtosis_eigen(kurtosis_matrix(white))
    psi = model.beta_coefs[:, :q] @ U
    A = expansion.coefs
    if include_mean and expansion.centered:
        A = A + expansion.mean_coefs
    zeta = A @ expansion.basis.gram @ psi
    return FicaModel(
        basis=model.basis,
        q=q,
        whitener=whitener,
        white_scores=white,
        kurtosis_eigenvalues=rho,
        rotation=U,
        psi_coefs=psi,
        component_scores=zeta,
        white_component_scores=white @ U,
    )


def gamma_transform(
    fica: FicaModel, model: FpcaModel, curve_coefs: np.ndarray
) -> np.ndarray:
    """Apply the independence-inducing operator to one curve.

    Projects the curve onto the penalized weight functions, whitens and
    rotates the score vector, and maps the result back to basis
    coordinates through the L2-orthonormal eigenfunctions. Coordinates of
    the output with respect to those eigenfunctions are the curve's
    independent component scores.
    """
    f = np.asarray(curve_coefs, dtype=float)
    if f.shape != (model.basis.p,):
        raise InvalidInputError(
            f"curve coefficients must have length {model.basis.p}, got {f.shape}"
        )
    q = fica.q
    z = model.weight_coefs[:, :q].T @ (model.basis.gram @ f)
    rotated = fica.rotation.T @ (fica.whitener @ z)
    return model.beta_coefs[:, :q] @ rotated
