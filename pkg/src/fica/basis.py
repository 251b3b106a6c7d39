"""B-spline bases: construction, evaluation, exact Gram matrix, difference
penalty, and least-squares fitting of discretely sampled curves.

The basis uses a clamped (full endpoint multiplicity) knot vector with
equally spaced interior knots, so ``p`` basis functions of a given order
span piecewise polynomials on the domain. The Gram matrix is assembled by
per-span Gauss-Legendre quadrature with ``order`` nodes, which is exact for
products of the basis functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    FitSingularError,
    InvalidConfigError,
    InvalidInputError,
    OutOfDomainError,
)

__all__ = [
    "SignalSample",
    "BasisSystem",
    "BasisExpansion",
    "make_basis",
    "eval_basis",
    "fit_coefficients",
]


@dataclass
class SignalSample:
    """Discrete multichannel signal: ``n`` curves sampled on their own grids.

    Parameters
    ----------
    values : list of 1d arrays
        Curve ``i`` holds ``m_i`` real samples.
    times : list of 1d arrays, optional
        Sampling points per curve, strictly increasing. When omitted, each
        curve gets a uniform grid on [0, 1].
    labels : list of str, optional
        Channel names; defaults to ``ch01, ch02, ...``.
    """

    values: list[np.ndarray]
    times: list[np.ndarray] | None = None
    labels: list[str] | None = None

    def __post_init__(self):
        self.values = [np.asarray(v, dtype=float) for v in self.values]
        if not self.values:
            raise InvalidInputError("signal sample holds no curves")
        if self.times is None:
            self.times = [np.linspace(0.0, 1.0, v.size) for v in self.values]
        else:
            self.times = [np.asarray(t, dtype=float) for t in self.times]
            if len(self.times) == 1 and len(self.values) > 1:
                self.times = [self.times[0]] * len(self.values)
        if len(self.times) != len(self.values):
            raise InvalidInputError(
                f"{len(self.values)} curves but {len(self.times)} time grids"
            )
        if self.labels is None:
            self.labels = [f"ch{i + 1:02d}" for i in range(len(self.values))]
        elif len(self.labels) != len(self.values):
            raise InvalidInputError("labels length does not match curve count")
        for lab, v, t in zip(self.labels, self.values, self.times):
            if v.ndim != 1 or t.ndim != 1 or v.size != t.size:
                raise InvalidInputError(f"curve {lab!r}: values/times shape mismatch")
            if v.size < 2:
                raise InvalidInputError(f"curve {lab!r}: needs at least 2 samples")
            if not np.all(np.isfinite(v)) or not np.all(np.isfinite(t)):
                raise InvalidInputError(f"curve {lab!r}: non-finite entries")
            if np.any(np.diff(t) <= 0):
                raise InvalidInputError(f"curve {lab!r}: times not strictly increasing")

    @classmethod
    def from_matrix(cls, values, times=None, labels=None) -> "SignalSample":
        """Build a sample from an ``n x m`` matrix with one shared grid."""
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise InvalidInputError("matrix input must be 2-dimensional")
        tlist = None if times is None else [np.asarray(times, dtype=float)] * values.shape[0]
        return cls([row for row in values], tlist, labels)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def domain(self) -> tuple[float, float]:
        return (
            float(min(t[0] for t in self.times)),
            float(max(t[-1] for t in self.times)),
        )

    def shared_times(self) -> np.ndarray | None:
        """Return the common grid if all curves share one, else None."""
        t0 = self.times[0]
        for t in self.times[1:]:
            if t.size != t0.size or not np.array_equal(t, t0):
                return None
        return t0


@dataclass
class BasisSystem:
    """B-spline basis with its Gram matrix and discrete difference penalty.

    ``gram[j, j']`` is the L2 inner product of basis functions j and j';
    ``penalty = diff.T @ diff`` where ``diff`` applies d-order differences
    to coefficient vectors.
    """

    domain: tuple[float, float]
    order: int
    p: int
    penalty_order: int
    knots: np.ndarray
    gram: np.ndarray
    diff: np.ndarray
    penalty: np.ndarray

    def to_dict(self) -> dict:
        return {
            "domain": [self.domain[0], self.domain[1]],
            "order": self.order,
            "p": self.p,
            "penalty_order": self.penalty_order,
            "knots": self.knots.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BasisSystem":
        return make_basis(
            tuple(d["domain"]), d["p"], d["order"], d.get("penalty_order", 2)
        )


@dataclass
class BasisExpansion:
    """Curves represented by rows of an ``n x p`` coefficient matrix.

    When ``centered``, the stored ``mean_coefs`` were subtracted from every
    row so that column means of ``coefs`` are zero.
    """

    basis: BasisSystem
    coefs: np.ndarray
    centered: bool = False
    mean_coefs: np.ndarray | None = None
    rss: np.ndarray | None = None
    labels: list[str] | None = None

    def __post_init__(self):
        self.coefs = np.asarray(self.coefs, dtype=float)
        if self.coefs.ndim != 2 or self.coefs.shape[1] != self.basis.p:
            raise InvalidInputError("coefficient matrix shape does not match basis")
        if self.mean_coefs is None:
            self.mean_coefs = np.zeros(self.basis.p)
        else:
            self.mean_coefs = np.asarray(self.mean_coefs, dtype=float)

    @property
    def n(self) -> int:
        return self.coefs.shape[0]


def make_basis(domain, p: int, order: int, penalty_order: int = 2) -> BasisSystem:
    """Construct a clamped B-spline basis with Gram and penalty matrices.

    Parameters
    ----------
    domain : (float, float)
        Interval endpoints, strictly increasing.
    p : int
        Basis dimension (number of basis functions).
    order : int
        Polynomial degree plus one; ``order=4`` gives cubic splines.
    penalty_order : int
        Difference order ``d`` of the discrete roughness penalty.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if not np.isfinite(lo) or not np.isfinite(hi) or hi <= lo:
        raise InvalidConfigError(f"degenerate domain [{lo}, {hi}]")
    if order < 1:
        raise InvalidConfigError(f"order must be >= 1, got {order}")
    if p < order:
        raise InvalidConfigError(f"basis dimension p={p} smaller than order={order}")
    if not 1 <= penalty_order < p:
        raise InvalidConfigError(
            f"penalty order must satisfy 1 <= d < p, got d={penalty_order}, p={p}"
        )
    n_interior = p - order
    interior = np.linspace(lo, hi, n_interior + 2)[1:-1]
    knots = np.concatenate([np.full(order, lo), interior, np.full(order, hi)])
    gram = _gram_matrix(knots, order, p)
    diff = np.diff(np.eye(p), n=penalty_order, axis=0)
    penalty = diff.T @ diff
    return BasisSystem((lo, hi), order, p, penalty_order, knots, gram, diff, penalty)


def eval_basis(basis: BasisSystem, points) -> np.ndarray:
    """Evaluate all basis functions at the given points.

    Returns a ``len(points) x p`` matrix whose rows sum to one (partition of
    unity) with at most ``order`` nonzero entries each. Points must lie in
    the basis domain; the right endpoint is included.
    """
    x = np.atleast_1d(np.asarray(points, dtype=float))
    lo, hi = basis.domain
    bad = x[(x < lo) | (x > hi) | ~np.isfinite(x)]
    if bad.size:
        raise OutOfDomainError(bad, basis.domain)
    return _design_matrix(basis.knots, basis.order, basis.p, x)


def fit_coefficients(
    sample: SignalSample, basis: BasisSystem, center: bool = True
) -> BasisExpansion:
    """Fit each curve to the basis by unpenalized least squares.

    Uses an SVD-based solve, so the fit is the orthogonal projection of the
    samples onto the basis evaluated at the curve's own grid. Raises
    :class:`FitSingularError` naming the first curve whose design matrix is
    rank deficient (``m_i < p`` or a degenerate grid).
    """
    lo, hi = basis.domain
    slo, shi = sample.domain
    if slo < lo or shi > hi:
        raise OutOfDomainError([slo, shi], basis.domain)

    n, p = sample.n, basis.p
    coefs = np.empty((n, p))
    rss = np.empty(n)
    shared = sample.shared_times()
    if shared is not None:
        design = eval_basis(basis, shared)
        sol, res, rank, _ = np.linalg.lstsq(design, np.column_stack(sample.values), rcond=None)
        if rank < p:
            raise FitSingularError(sample.labels[0], rank, p)
        # C-contiguous so downstream BLAS calls accumulate identically to
        # coefficients reloaded from JSON artifacts
        coefs = np.ascontiguousarray(sol.T)
        fitted = design @ sol
        rss = ((np.column_stack(sample.values) - fitted) ** 2).sum(axis=0)
    else:
        for i, (y, t) in enumerate(zip(sample.values, sample.times)):
            design = eval_basis(basis, t)
            sol, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
            if rank < p:
                raise FitSingularError(sample.labels[i], rank, p)
            coefs[i] = sol
            rss[i] = float(((y - design @ sol) ** 2).sum())

    mean_coefs = None
    if center:
        mean_coefs = coefs.mean(axis=0)
        coefs = coefs - mean_coefs
    return BasisExpansion(
        basis, coefs, centered=center, mean_coefs=mean_coefs,
        rss=np.asarray(rss, dtype=float), labels=list(sample.labels),
    )


def _design_matrix(knots, order, p, x):
    """Cox-de Boor recurrence, vectorized over evaluation points."""
    t = knots
    deg = order - 1
    spans = np.searchsorted(t, x, side="right") - 1
    # right-closed domain: points at the last knot belong to the last span
    spans = np.clip(spans, deg, p - 1)
    npts = x.size
    N = np.zeros((npts, order))
    N[:, 0] = 1.0
    left = np.empty((npts, order))
    right = np.empty((npts, order))
    for j in range(1, order):
        left[:, j] = x - t[spans + 1 - j]
        right[:, j] = t[spans + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            denom = right[:, r + 1] + left[:, j - r]
            frac = np.where(denom != 0.0, N[:, r] / np.where(denom == 0.0, 1.0, denom), 0.0)
            N[:, r] = saved + right[:, r + 1] * frac
            saved = left[:, j - r] * frac
        N[:, j] = saved
    out = np.zeros((npts, p))
    out[np.arange(npts)[:, None], spans[:, None] - deg + np.arange(order)] = N
    return out


def _gram_matrix(knots, order, p):
    """Exact Gram matrix via per-span Gauss-Legendre with ``order`` nodes."""
    nodes, weights = leggauss(max(order, 1))
    spans = np.unique(knots)
    G = np.zeros((p, p))
    for a, b in zip(spans[:-1], spans[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        B = _design_matrix(knots, order, p, mid + half * nodes)
        G += half * (B * weights[:, None]).T @ B
    return 0.5 * (G + G.T)
