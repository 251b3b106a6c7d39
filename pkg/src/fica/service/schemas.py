"""Pydantic request/response models for the HTTP service.

Numeric matrices travel row-major with explicit dimensions; component
indices are one-based everywhere the API is user-facing, matching the CLI
``--select`` numbering.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class Matrix(BaseModel):
    rows: int
    cols: int
    data: list[float]


class CreateSessionRequest(BaseModel):
    csv: str = Field(description="Signal CSV text, one curve per row.")
    times_csv: str | None = None
    p: int = 230
    order: int = 4
    penalty_order: int = 2
    center: bool = True


class SessionInfo(BaseModel):
    session_id: str
    revision: int
    n_curves: int
    p: int
    order: int
    domain: tuple[float, float]
    labels: list[str]
    has_tuning: bool = False
    has_model: bool = False
    selection: list[int] = []


class TuneRequest(BaseModel):
    grid: list[float] | None = None
    ell: float = 0.1
    shrink: bool | None = None
    max_q: int | None = None
    revision: int | None = None


class TuneResponse(BaseModel):
    revision: int
    j0: int
    q_star: int
    lambda_star: float
    log_bcv_star: float | None
    lambda_grid: list[float]
    bcv: Matrix
    flags: list[str]
    surface_csv: str


class DecomposeRequest(BaseModel):
    lam: float = Field(alias="lambda")
    q: int
    shrink: bool | None = None
    revision: int | None = None

    model_config = {"populate_by_name": True}


class DecomposeResponse(BaseModel):
    revision: int
    lam: float = Field(serialization_alias="lambda")
    q: int
    eigenvalues: list[float]
    rho: list[float]
    var_pct: float


class ComponentCard(BaseModel):
    index: int
    rho: float
    gaussian_distance: float
    channel_scores: list[float]
    times: list[float]
    psi: list[float]
    selected: bool


class ComponentsResponse(BaseModel):
    revision: int
    q: int
    gaussian_reference: float
    labels: list[str]
    components: list[ComponentCard]


class SelectionRequest(BaseModel):
    indices: list[int]
    revision: int


class SelectionResponse(BaseModel):
    revision: int
    indices: list[int]


class CleanedCurve(BaseModel):
    channel: int
    label: str
    values: list[float]


class CleanedResponse(BaseModel):
    revision: int
    times: list[float]
    curves: list[CleanedCurve]


class SummaryResponse(BaseModel):
    revision: int
    j0: int | None
    q: int | None
    lam: float | None = Field(default=None, serialization_alias="lambda")
    log_bcv: float | None
    var_pct_lambda: float | None
    var_pct_lambda0: float | None
    selection: list[int]
    rho: list[float]
    flags: list[str]


class ErrorBody(BaseModel):
    detail: str
    code: str = "error"
    stage: str | None = None
