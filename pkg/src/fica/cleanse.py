"""Artifactual-subspace expansion and subtraction in coefficient space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisExpansion, BasisSystem, eval_basis
from .errors import InvalidInputError, InvalidSelectionError
from .ica import FicaModel

__all__ = ["CleanedSignal", "artifact_expansion", "subtract", "evaluate_at"]


@dataclass
class CleanedSignal:
    """Cleaned coefficients next to the subtracted artifact part.

    ``artifact_coefs`` is stored as ``original - clean`` so the bookkeeping
    identity holds exactly in floating point; the sample mean (if any) is
    kept separately and only re-added on evaluation.
    """

    clean_coefs: np.ndarray
    artifact_coefs: np.ndarray
    removed: tuple[int, ...]
    mean_coefs: np.ndarray
    labels: list[str] | None = None


def artifact_expansion(fica: FicaModel, selection) -> np.ndarray:
    """Coefficients of the selected-component sum for every curve.

    ``selection`` holds zero-based component indices; an empty selection
    yields the zero matrix.
    """
    sel = sorted(set(int(i) for i in selection))
    zeta, psi = fica.component_scores, fica.psi_coefs
    if any(i < 0 or i >= fica.q for i in sel):
        raise InvalidSelectionError(
            f"selection {sel} outside valid component range 0..{fica.q - 1}"
        )
    if not sel:
        return np.zeros((zeta.shape[0], psi.shape[0]))
    return zeta[:, sel] @ psi[:, sel].T


def subtract(
    expansion: BasisExpansion, artifact: np.ndarray, removed=()
) -> CleanedSignal:
    """Subtract artifact coefficients from the expansion, keeping both parts.

    The stored sample mean is left untouched: artifacts live in the
    centered space and the mean is restored at evaluation time.
    """
    artifact = np.asarray(artifact, dtype=float)
    if artifact.shape != expansion.coefs.shape:
        raise InvalidInputError(
            f"artifact shape {artifact.shape} != coefficients {expansion.coefs.shape}"
        )
    clean = expansion.coefs - artifact
    return CleanedSignal(
        clean_coefs=clean,
        artifact_coefs=expansion.coefs - clean,
        removed=tuple(sorted(set(int(i) for i in removed))),
        mean_coefs=np.array(expansion.mean_coefs, dtype=float),
        labels=list(expansion.labels) if expansion.labels else None,
    )


def evaluate_at(
    cleaned: CleanedSignal,
    basis: BasisSystem,
    times,
    restore_mean: bool = False,
) -> np.ndarray:
    """Evaluate the cleaned curves on a grid, optionally adding the mean."""
    design = eval_basis(basis, times)
    out = cleaned.clean_coefs @ design.T
    if restore_mean:
        out = out + design @ cleaned.mean_coefs
    return out
