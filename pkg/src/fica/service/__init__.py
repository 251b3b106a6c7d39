"""HTTP facade over the pipeline for interactive component selection.

All numerics happen in the core package; the service only orchestrates
sessions, snapshots and JSON shaping. Endpoints mirror the staged CLI and
the cleaned-signal export reuses the CLI writer so both produce identical
bytes for identical inputs.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import io as fio
from ..basis import eval_basis, fit_coefficients, make_basis
from ..cleanse import artifact_expansion, evaluate_at, subtract
from ..errors import (
    FicaError,
    InvalidConfigError,
    InvalidInputError,
    InvalidSelectionError,
    OutOfDomainError,
)
from ..fpca import penalized_fpca
from ..pipeline import decompose_expansion
from ..tuning import tune
from .schemas import (
    CleanedCurve,
    CleanedResponse,
    ComponentCard,
    ComponentsResponse,
    CreateSessionRequest,
    DecomposeRequest,
    DecomposeResponse,
    Matrix,
    SelectionRequest,
    SelectionResponse,
    SessionInfo,
    SummaryResponse,
    TuneRequest,
    TuneResponse,
)
from .store import SessionStore, StaleRevisionError, UnknownSessionError

MAX_TRANSPORT_POINTS = 2000


def _decimate(times: np.ndarray, full: bool) -> np.ndarray:
    if full or times.size <= MAX_TRANSPORT_POINTS:
        return times
    stride = math.ceil(times.size / MAX_TRANSPORT_POINTS)
    return times[::stride]


def _session_info(session) -> SessionInfo:
    snap = session.snapshot()
    e = session.expansion
    return SessionInfo(
        session_id=session.id,
        revision=snap["revision"],
        n_curves=e.n,
        p=e.basis.p,
        order=e.basis.order,
        domain=e.basis.domain,
        labels=e.labels or [],
        has_tuning=snap["tuning"] is not None,
        has_model=snap["fica"] is not None,
        selection=[i + 1 for i in snap["selection"]],
    )


def create_app(frontend_dir: str | None = None, store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="fica service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = store if store is not None else SessionStore()
    app.state.sessions = sessions

    @app.exception_handler(FicaError)
    async def fica_error_handler(request: Request, err: FicaError):
        if isinstance(err, UnknownSessionError):
            status = 404
        elif isinstance(err, StaleRevisionError):
            status = 409
        elif isinstance(
            err,
            (InvalidConfigError, InvalidSelectionError, InvalidInputError, OutOfDomainError),
        ):
            status = 422
        else:
            status = 500
        stage = request.url.path.rsplit("/", 1)[-1]
        return JSONResponse(
            status_code=status,
            content={"detail": str(err), "code": err.code, "stage": stage},
        )

    @app.post("/sessions", response_model=SessionInfo)
    def create_session(req: CreateSessionRequest):
        sample = fio.parse_signal_text(req.csv, req.times_csv)
        basis = make_basis(sample.domain, req.p, req.order, req.penalty_order)
        expansion = fit_coefficients(sample, basis, req.center)
        return _session_info(sessions.create(expansion, sample.shared_times()))

    @app.get("/sessions/{session_id}", response_model=SessionInfo)
    def get_session(session_id: str):
        return _session_info(sessions.get(session_id))

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        sessions.get(session_id)
        sessions.drop(session_id)
        return {"deleted": session_id}

    @app.post("/sessions/{session_id}/tune", response_model=TuneResponse)
    def tune_session(session_id: str, req: TuneRequest):
        session = sessions.get(session_id)
        result = tune(session.expansion, req.grid, req.ell, req.shrink, max_q=req.max_q)

        def apply(s):
            s.tuning = result

        session = sessions.mutate(session_id, req.revision, apply)
        return TuneResponse(
            revision=session.revision,
            j0=result.j0,
            q_star=result.q_star,
            lambda_star=result.lambda_star,
            log_bcv_star=result.log_bcv_star,
            lambda_grid=result.lambda_grid.tolist(),
            bcv=Matrix(rows=result.bcv.shape[0], cols=result.bcv.shape[1],
                       data=result.bcv.ravel().tolist()),
            flags=result.flags,
            surface_csv=fio.tuning_surface_csv(result),
        )

    @app.post("/sessions/{session_id}/decompose", response_model=DecomposeResponse)
    def decompose_session(session_id: str, req: DecomposeRequest):
        session = sessions.get(session_id)
        e = session.expansion
        model, fica_model = decompose_expansion(e, req.lam, req.q, req.shrink)

        def apply(s):
            s.model = model
            s.fica = fica_model
            s.selection = ()

        session = sessions.mutate(session_id, req.revision, apply)
        return DecomposeResponse(
            revision=session.revision,
            lam=model.lam,
            q=fica_model.q,
            eigenvalues=model.eigenvalues.tolist(),
            rho=fica_model.kurtosis_eigenvalues.tolist(),
            var_pct=100.0 * model.variance_fraction(fica_model.q),
        )

    def _require_model(session_id: str):
        session = sessions.get(session_id)
        snap = session.snapshot()
        if snap["fica"] is None:
            raise InvalidConfigError("no decomposition in this session yet")
        return session, snap

    @app.get("/sessions/{session_id}/components", response_model=ComponentsResponse)
    def components(session_id: str, full: bool = False):
        session, snap = _require_model(session_id)
        e = session.expansion
        fica_model = snap["fica"]
        lo, hi = e.basis.domain
        times = _decimate(np.linspace(lo, hi, 1024 if full else 512), full)
        design = eval_basis(e.basis, times)
        psi_vals = design @ fica_model.psi_coefs
        selected = set(snap["selection"])
        cards = [
            ComponentCard(
                index=l + 1,
                rho=float(fica_model.kurtosis_eigenvalues[l]),
                gaussian_distance=float(
                    abs(fica_model.kurtosis_eigenvalues[l] - fica_model.gaussian_reference)
                ),
                channel_scores=fica_model.component_scores[:, l].tolist(),
                times=times.tolist(),
                psi=psi_vals[:, l].tolist(),
                selected=l in selected,
            )
            for l in range(fica_model.q)
        ]
        return ComponentsResponse(
            revision=snap["revision"],
            q=fica_model.q,
            gaussian_reference=fica_model.gaussian_reference,
            labels=e.labels or [],
            components=cards,
        )

    @app.put("/sessions/{session_id}/selection", response_model=SelectionResponse)
    def put_selection(session_id: str, req: SelectionRequest):
        session, snap = _require_model(session_id)
        fica_model = snap["fica"]
        zero_based = sorted(set(i - 1 for i in req.indices))
        if any(i < 0 or i >= fica_model.q for i in zero_based):
            raise InvalidSelectionError(
                f"selection {req.indices} outside component range 1..{fica_model.q}"
            )

        def apply(s):
            s.selection = tuple(zero_based)

        session = sessions.mutate(session_id, req.revision, apply)
        return SelectionResponse(
            revision=session.revision, indices=[i + 1 for i in zero_based]
        )

    def _cleaned_values(session, snap, points: int | None, full: bool, raw: bool = False):
        e = session.expansion
        fica_model = snap["fica"]
        selection = () if raw else snap["selection"]
        artifact = artifact_expansion(fica_model, list(selection))
        cleaned = subtract(e, artifact, selection)
        lo, hi = e.basis.domain
        times = np.linspace(lo, hi, points or 512)
        times = _decimate(times, full or points is not None)
        return times, evaluate_at(cleaned, e.basis, times, restore_mean=True)

    @app.get("/sessions/{session_id}/cleaned", response_model=CleanedResponse)
    def cleaned(
        session_id: str,
        channels: str | None = Query(default=None, description="Comma list of 1-based channels."),
        points: int | None = None,
        full: bool = False,
        raw: bool = Query(default=False, description="Evaluate with an empty selection."),
    ):
        session, snap = _require_model(session_id)
        times, values = _cleaned_values(session, snap, points, full, raw)
        labels = session.expansion.labels or []
        if channels:
            try:
                wanted = sorted(set(int(tok) for tok in channels.split(",") if tok.strip()))
            except ValueError as exc:
                raise InvalidConfigError(f"bad channels list {channels!r}") from exc
            if any(c < 1 or c > values.shape[0] for c in wanted):
                raise InvalidConfigError(
                    f"channels {channels!r} outside 1..{values.shape[0]}"
                )
        else:
            wanted = list(range(1, values.shape[0] + 1))
        curves = [
            CleanedCurve(
                channel=c,
                label=labels[c - 1] if c - 1 < len(labels) else f"ch{c:02d}",
                values=values[c - 1].tolist(),
            )
            for c in wanted
        ]
        return CleanedResponse(revision=snap["revision"], times=times.tolist(), curves=curves)

    @app.get("/sessions/{session_id}/export/cleaned.csv", response_class=PlainTextResponse)
    def export_cleaned(session_id: str, points: int | None = None):
        """Cleaned signal CSV, byte-identical to the CLI `clean` output.

        Defaults to the session's original sampling grid when the input
        curves shared one, exactly like the CLI.
        """
        session, snap = _require_model(session_id)
        e = session.expansion
        fica_model = snap["fica"]
        artifact = artifact_expansion(fica_model, list(snap["selection"]))
        cleaned = subtract(e, artifact, snap["selection"])
        if points is None and session.times is not None:
            times = session.times
        else:
            lo, hi = e.basis.domain
            times = np.linspace(lo, hi, points or 512)
        values = evaluate_at(cleaned, e.basis, times, restore_mean=True)
        return PlainTextResponse(fio.signal_to_text(values), media_type="text/csv")

    @app.get("/sessions/{session_id}/export/model.json")
    def export_model(session_id: str):
        session, snap = _require_model(session_id)
        payload = {"fica": fio.fica_to_dict(snap["fica"])}
        if snap["model"] is not None:
            payload["fpca"] = fio.fpca_to_dict(snap["model"])
        return payload

    @app.get("/sessions/{session_id}/summary", response_model=SummaryResponse)
    def summary(session_id: str):
        session = sessions.get(session_id)
        snap = session.snapshot()
        e = session.expansion
        tuning_res, model, fica_model = snap["tuning"], snap["model"], snap["fica"]
        var_l = var_0 = None
        if model is not None and fica_model is not None:
            var_l = 100.0 * model.variance_fraction(fica_model.q)
            base0 = (
                model
                if model.lam == 0.0
                else penalized_fpca(e, 0.0, model.q, model.shrink)
            )
            var_0 = 100.0 * base0.variance_fraction(min(fica_model.q, base0.q))
        return SummaryResponse(
            revision=snap["revision"],
            j0=tuning_res.j0 if tuning_res else None,
            q=fica_model.q if fica_model else None,
            lam=model.lam if model else None,
            log_bcv=tuning_res.log_bcv_star if tuning_res else None,
            var_pct_lambda=var_l,
            var_pct_lambda0=var_0,
            selection=[i + 1 for i in snap["selection"]],
            rho=fica_model.kurtosis_eigenvalues.tolist() if fica_model else [],
            flags=tuning_res.flags if tuning_res else [],
        )

    if frontend_dir:
        dist = Path(frontend_dir)
        if dist.is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/", StaticFiles(directory=str(dist), html=True), name="ui")

    return app
