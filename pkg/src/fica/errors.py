"""Exception hierarchy shared by the library, CLI and HTTP service.

Every error carries a stable machine-readable ``code`` so that the CLI can
map failures to exit codes and the service can tag HTTP responses.
"""


class FicaError(Exception):
    """Base class for all package errors."""

    code = "error"


class InvalidConfigError(FicaError):
    """A parameter combination violates a precondition (CLI exit code 2)."""

    code = "invalid-configuration"


class InvalidInputError(FicaError):
    """Input data is malformed (shape mismatch, non-finite, asymmetric...)."""

    code = "invalid-input"


class InvalidSelectionError(FicaError):
    """A component selection references indices outside 1..q."""

    code = "invalid-selection"


class OutOfDomainError(FicaError):
    """Evaluation or sampling points fall outside the basis domain."""

    code = "out-of-domain"

    def __init__(self, points, domain):
        self.points = list(points)
        self.domain = domain
        shown = ", ".join(f"{p:g}" for p in self.points[:8])
        more = "" if len(self.points) <= 8 else f" (+{len(self.points) - 8} more)"
        super().__init__(
            f"points outside domain [{domain[0]:g}, {domain[1]:g}]: {shown}{more}"
        )


class FitSingularError(FicaError):
    """Least-squares design matrix for one curve is rank deficient."""

    code = "fit-singular"

    def __init__(self, curve, rank, p):
        self.curve = curve
        super().__init__(
            f"curve {curve!r}: design matrix rank {rank} < basis dimension {p}"
        )


class FactorizationError(FicaError):
    """A matrix factorization failed (non-PD metric)."""

    code = "factorization"


class SingularSmootherError(FicaError):
    """The inverse half power of the smoothing operator is undefined."""

    code = "singular-smoother"


class WhiteningSingularError(FicaError):
    """Score covariance is rank deficient; the caller must reduce q."""

    code = "whitening-singular"


class InsufficientSampleError(FicaError):
    """Too few observations for the requested estimator."""

    code = "insufficient-sample"


class DegenerateDataError(FicaError):
    """Data carries no usable variation (e.g. identically zero)."""

    code = "degenerate-data"


class MetricUndefinedError(FicaError):
    """A separation metric cannot be evaluated on this input."""

    code = "metric-undefined"
