"""Bi-smoothed functional independent component analysis.

Penalized functional PCA in B-spline coordinates followed by a kurtosis
eigendecomposition of the retained scores, with baseline cross-validation
for parameter selection and component subtraction for multichannel signal
cleaning.
"""

from .basis import (
    BasisExpansion,
    BasisSystem,
    SignalSample,
    eval_basis,
    fit_coefficients,
    make_basis,
)
from .cleanse import CleanedSignal, artifact_expansion, evaluate_at, subtract
from .errors import FicaError
from .fpca import (
    FpcaModel,
    SmoothingOperator,
    penalized_fpca,
    reconstruct_curves,
    shrinkage_covariance,
    smoothing_half_power,
)
from .ica import (
    FicaModel,
    build_fica,
    gamma_transform,
    kurtosis_eigen,
    kurtosis_matrix,
    whiten,
)
from .synth import GroundTruth, MixtureSpec, amari_index, generate, match_correlation
from .tuning import (
    TuningResult,
    baseline_cv,
    classical_cv,
    default_lambda_grid,
    select_truncation,
    tune,
)

__version__ = "0.1.0"

__all__ = [
    "SignalSample",
    "BasisSystem",
    "BasisExpansion",
    "make_basis",
    "eval_basis",
    "fit_coefficients",
    "FpcaModel",
    "SmoothingOperator",
    "penalized_fpca",
    "smoothing_half_power",
    "shrinkage_covariance",
    "reconstruct_curves",
    "FicaModel",
    "whiten",
    "kurtosis_matrix",
    "kurtosis_eigen",
    "build_fica",
    "gamma_transform",
    "TuningResult",
    "baseline_cv",
    "classical_cv",
    "select_truncation",
    "tune",
    "default_lambda_grid",
    "CleanedSignal",
    "artifact_expansion",
    "subtract",
    "evaluate_at",
    "MixtureSpec",
    "GroundTruth",
    "generate",
    "match_correlation",
    "amari_index",
    "FicaError",
    "__version__",
]
