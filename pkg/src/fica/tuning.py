"""Penalty and truncation selection: baseline cross-validation over a
lambda grid, classical leave-one-out cross-validation, and the truncation
rule based on first-order eigenvalue differences.

Baseline CV compares the smoothed principal component reconstruction at a
baseline penalty with the one at an incremented penalty; the residual
coefficient matrix is reconstructed through the Cholesky factor of its own
shrinkage covariance before the quadratic Gram form is accumulated. When
the two reconstructions coincide to machine precision at every grid point
(data invariant under the penalty, e.g. curves in the difference-penalty
null space), the whole sweep is reported as exactly zero and flagged.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .basis import BasisExpansion
from .errors import InsufficientSampleError, InvalidConfigError, InvalidInputError
from .fpca import FpcaModel, penalized_fpca, shrinkage_covariance

__all__ = [
    "TuningResult",
    "BaselineCvValues",
    "TruncationChoice",
    "baseline_cv",
    "classical_cv",
    "select_truncation",
    "tune",
    "default_lambda_grid",
]

# a full sweep whose residuals never exceed this fraction of the
# reconstruction norm is penalty-invariant up to rounding
DEGENERATE_RTOL = 1e-10

DEFAULT_ELL = 0.1


def default_lambda_grid() -> np.ndarray:
    """{0} plus decades 1e-2 .. 1e8."""
    return np.concatenate([[0.0], 10.0 ** np.arange(-2, 9, dtype=float)])


@dataclass
class BaselineCvValues:
    """Per-lambda BCV values for one q, with sweep-level flags."""

    q: int
    lambda_grid: np.ndarray
    values: np.ndarray
    degenerate: bool = False
    fallback_diagonal: bool = False


@dataclass
class TruncationChoice:
    """Truncation index and whether the no-relative-maximum fallback fired."""

    j0: int
    fallback: bool = False


@dataclass
class TuningResult:
    """BCV surface over (q, lambda) with the selected coordinates.

    ``bcv[i, j]`` is the criterion at q = i + 1 and ``lambda_grid[j]``;
    ``lambda_star`` is the grid argmin at ``q_star`` with ties resolved
    toward the smaller lambda (and smaller q across rows).
    """

    lambda_grid: np.ndarray
    ell: float
    bcv: np.ndarray
    j0: int
    q_star: int
    lambda_star: float
    log_bcv_star: float | None
    cv: np.ndarray | None = None
    j0_fallback: bool = False
    flags: list[str] = field(default_factory=list)


def _resolve_shrink(expansion: BasisExpansion, shrink: bool | None) -> bool:
    if shrink is None:
        return expansion.basis.p > expansion.n
    return shrink


def _smoothed_coef_matrix(model: FpcaModel, q: int) -> np.ndarray:
    qq = min(q, model.q)
    return model.beta_coefs[:, :qq] @ model.scores[:, :qq].T


def _reconstruct_residuals(E: np.ndarray) -> tuple[np.ndarray, bool]:
    """Whiten residual columns by the Cholesky factor of their shrinkage
    covariance; fall back to the diagonal-only target when that factor
    does not exist."""
    cov, _ = shrinkage_covariance(E.T)
    try:
        L = sla.cholesky(cov, lower=True)
        return sla.solve_triangular(L, E, lower=True, trans="T"), False
    except sla.LinAlgError:
        diag = np.diag(cov).copy()
        floor = max(diag.max(), 0.0)
        if floor <= 0.0:
            raise
        diag[diag <= 0] = 1e-300 * floor
        return E / np.sqrt(diag)[:, None], True


def baseline_cv(
    expansion: BasisExpansion,
    q: int,
    lambda_grid,
    ell: float = DEFAULT_ELL,
    shrink: bool | None = None,
) -> BaselineCvValues:
    """Baseline cross-validation values over a lambda grid at fixed q.

    For every lambda the penalized FPCA is fit at lambda and lambda + ell,
    the two smoothed coefficient matrices are differenced, the residual
    columns are reconstructed through the shrinkage covariance factor, and
    the mean Gram quadratic form is returned. ``shrink=None`` enables the
    shrinkage second-moment estimate inside the FPCA exactly when p > n.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0:
        raise InvalidConfigError("lambda grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise InvalidConfigError("lambda grid must be finite and nonnegative")
    if not ell > 0:
        raise InvalidConfigError(f"ell must be positive, got {ell}")
    if q < 1:
        raise InvalidConfigError(f"q must be >= 1, got {q}")
    use_shrink = _resolve_shrink(expansion, shrink)
    n = expansion.n
    G = expansion.basis.gram

    def cell(lam: float) -> tuple[float, float, bool]:
        # both matrices are p x n whatever number of pairs was retained
        base = _smoothed_coef_matrix(penalized_fpca(expansion, lam, q, use_shrink), q)
        bumped = _smoothed_coef_matrix(
            penalized_fpca(expansion, lam + ell, q, use_shrink), q
        )
        E = base - bumped
        scale = max(np.linalg.norm(base), np.linalg.norm(bumped))
        rel = np.linalg.norm(E) / scale if scale > 0 else 0.0
        Ehat, fell_back = _reconstruct_residuals(E)
        value = float(np.einsum("ij,ij->", Ehat, G @ Ehat) / n)
        return value, rel, fell_back

    workers = _thread_count()
    if workers > 1 and grid.size > 1:
        # cells are independent; map() gathers results in grid order
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(cell, grid))
    else:
        cells = [cell(lam) for lam in grid]
    values = np.array([c[0] for c in cells])
    rel = np.array([c[1] for c in cells])
    fallback = any(c[2] for c in cells)

    degenerate = bool(np.all(rel <= DEGENERATE_RTOL))
    if degenerate:
        values = np.zeros_like(values)
    return BaselineCvValues(
        q=q,
        lambda_grid=grid,
        values=values,
        degenerate=degenerate,
        fallback_diagonal=fallback,
    )


def classical_cv(
    expansion: BasisExpansion,
    q: int,
    lambda_grid,
    shrink: bool = False,
) -> np.ndarray:
    """Leave-one-out cross-validation of the q-term expansion per lambda.

    Each curve is scored against the exact q-term expansion built on the
    held-out eigenfunctions: the held-out model supplies the penalized
    weight functions, the curve's scores are its projections on them, and
    the reconstruction uses the dual coefficients C^{-1} b so that a curve
    lying in the held-out span is reproduced exactly for every lambda.
    Unlike baseline CV this is the plain estimator: shrinkage is off unless
    explicitly requested.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0:
        raise InvalidConfigError("lambda grid is empty")
    n = expansion.n
    if n < 3:
        raise InsufficientSampleError(f"leave-one-out needs n >= 3, got {n}")
    use_shrink = shrink
    basis = expansion.basis
    G, P = basis.gram, basis.penalty
    A = expansion.coefs

    out = np.empty(grid.size)
    for k, lam in enumerate(grid):
        acc = 0.0
        for i in range(n):
            sub = BasisExpansion(basis, np.delete(A, i, axis=0), centered=False)
            held = penalized_fpca(sub, lam, q, use_shrink)
            qq = min(q, held.q)
            B = held.weight_coefs[:, :qq]
            # dual coefficients of the exact expansion: C^{-1} b = b + lam G^{-1} P b
            dual = B + lam * np.linalg.solve(G, P @ B)
            z = B.T @ (G @ A[i])
            resid = A[i] - dual @ z
            acc += float(resid @ G @ resid)
        out[k] = acc / n
    return out


def select_truncation(eigenvalues) -> TruncationChoice:
    """First relative maximum of the first-order eigenvalue differences.

    With d_j = eta_j - eta_{j+1}, returns the smallest j such that
    d_j > d_{j+1} and (j = 1 or d_j > d_{j-1}); the left endpoint counts
    as a relative maximum. Without any such j the rule falls back to the
    last difference index (length - 1) and sets the fallback flag.
    """
    eta = np.asarray(eigenvalues, dtype=float)
    if eta.size < 3:
        raise InvalidInputError(f"need at least 3 eigenvalues, got {eta.size}")
    d = -np.diff(eta)
    for j in range(d.size - 1):
        if d[j] > d[j + 1] and (j == 0 or d[j] > d[j - 1]):
            return TruncationChoice(j0=j + 1, fallback=False)
    return TruncationChoice(j0=eta.size - 1, fallback=True)


def _thread_count() -> int:
    raw = os.environ.get("FICA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def tune(
    expansion: BasisExpansion,
    lambda_grid=None,
    ell: float = DEFAULT_ELL,
    shrink: bool | None = None,
    compute_cv: bool = False,
    max_q: int | None = None,
) -> TuningResult:
    """Joint (q, lambda) selection by baseline cross-validation.

    The truncation bound j0 comes from the unpenalized eigenvalues; BCV is
    evaluated for q = 1..j0 over the grid and the cell with the smallest
    value wins, ties resolved toward smaller lambda then smaller q. Grid
    cells are independent and run concurrently when FICA_THREADS > 1 (see
    :func:`baseline_cv`), gathered in grid order so output is reproducible.
    """
    grid = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if grid.size == 0:
        raise InvalidConfigError("lambda grid is empty")
    use_shrink = _resolve_shrink(expansion, shrink)

    base = penalized_fpca(
        expansion, 0.0, min(expansion.n, expansion.basis.p), use_shrink
    )
    if base.q < 3:
        choice = TruncationChoice(j0=max(1, base.q - 1), fallback=True)
    else:
        choice = select_truncation(base.eigenvalues)
    j0 = choice.j0 if max_q is None else min(choice.j0, max_q)
    j0 = max(1, j0)

    qs = list(range(1, j0 + 1))
    rows = [baseline_cv(expansion, q, grid, ell, use_shrink) for q in qs]

    bcv = np.vstack([r.values for r in rows])
    flags = []
    if any(r.degenerate for r in rows):
        flags.append("degenerate-penalty-invariant-data")
    if any(r.fallback_diagonal for r in rows):
        flags.append("shrinkage-fallback-diagonal")
    if choice.fallback:
        flags.append("j0-fallback")

    # scan in (q asc, lambda asc) order keeping strict improvement:
    # ties go to the smaller lambda, then the smaller q
    best = (np.inf, 1, float(grid[0]))
    for qi, q in enumerate(qs):
        for li, lam in enumerate(grid):
            if bcv[qi, li] < best[0]:
                best = (bcv[qi, li], q, float(lam))
    log_star = float(np.log(best[0])) if best[0] > 0 else None

    cv = None
    if compute_cv:
        cv = np.vstack([classical_cv(expansion, q, grid) for q in qs])

    return TuningResult(
        lambda_grid=grid,
        ell=float(ell),
        bcv=bcv,
        j0=j0,
        q_star=best[1],
        lambda_star=best[2],
        log_bcv_star=log_star,
        cv=cv,
        j0_fallback=choice.fallback,
        flags=flags,
    )
