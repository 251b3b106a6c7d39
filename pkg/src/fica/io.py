"""File formats: signal CSV, sidecar times CSV, and JSON model exchange.

Signal CSV holds one curve per row of comma-separated samples; rows may
differ in length. The optional times CSV carries either a single shared
row or one row per curve. All floats are written with 10 significant
digits so reruns are byte-comparable.
"""

from __future__ import annotations

import io as _io
import json
from pathlib import Path

import numpy as np

from .basis import BasisExpansion, BasisSystem, SignalSample
from .errors import InvalidInputError
from .fpca import FpcaModel
from .ica import FicaModel
from .synth import GroundTruth, MixtureSpec
from .tuning import TuningResult

__all__ = [
    "fmt",
    "read_signal_csv",
    "write_signal_csv",
    "parse_signal_text",
    "signal_to_text",
    "expansion_to_dict",
    "expansion_from_dict",
    "fpca_to_dict",
    "fpca_from_dict",
    "fica_to_dict",
    "fica_from_dict",
    "tuning_to_dict",
    "tuning_surface_csv",
    "write_json",
    "synth_bundle_to_dict",
    "synth_bundle_from_dict",
]

FLOAT_FMT = "%.10g"


def fmt(x: float) -> str:
    return FLOAT_FMT % float(x)


def _parse_rows(text: str) -> list[np.ndarray]:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append(np.array([float(tok) for tok in line.split(",")]))
        except ValueError as exc:
            raise InvalidInputError(f"bad CSV row: {line[:60]!r} ({exc})") from exc
    if not rows:
        raise InvalidInputError("CSV holds no data rows")
    return rows


def parse_signal_text(text: str, times_text: str | None = None) -> SignalSample:
    """Parse curves (and optional times) from CSV text."""
    values = _parse_rows(text)
    times = None
    if times_text is not None:
        trows = _parse_rows(times_text)
        if len(trows) == 1:
            times = [trows[0]] * len(values)
        elif len(trows) == len(values):
            times = trows
        else:
            raise InvalidInputError(
                f"times CSV has {len(trows)} rows for {len(values)} curves"
            )
    return SignalSample(values, times)


def read_signal_csv(path, times_path=None) -> SignalSample:
    text = Path(path).read_text()
    times_text = Path(times_path).read_text() if times_path else None
    return parse_signal_text(text, times_text)


def signal_to_text(values: np.ndarray | list) -> str:
    """Render curves (rows) as CSV text with stable float formatting."""
    rows = values if isinstance(values, list) else [row for row in np.asarray(values)]
    return "\n".join(",".join(fmt(v) for v in row) for row in rows) + "\n"


def write_signal_csv(values, path) -> None:
    Path(path).write_text(signal_to_text(values))


def matrix_dict(a: np.ndarray) -> dict:
    """Row-major wire format with explicit dimensions."""
    a = np.asarray(a, dtype=float)
    return {"rows": a.shape[0], "cols": a.shape[1], "data": a.ravel().tolist()}


_mat = matrix_dict


def _unmat(d: dict) -> np.ndarray:
    return np.array(d["data"], dtype=float).reshape(d["rows"], d["cols"])


def expansion_to_dict(e: BasisExpansion) -> dict:
    return {
        "basis": e.basis.to_dict(),
        "coefs": _mat(e.coefs),
        "centered": e.centered,
        "mean_coefs": e.mean_coefs.tolist(),
        "rss": None if e.rss is None else e.rss.tolist(),
        "labels": e.labels,
    }


def expansion_from_dict(d: dict) -> BasisExpansion:
    return BasisExpansion(
        basis=BasisSystem.from_dict(d["basis"]),
        coefs=_unmat(d["coefs"]),
        centered=d["centered"],
        mean_coefs=np.array(d["mean_coefs"], dtype=float),
        rss=None if d.get("rss") is None else np.array(d["rss"], dtype=float),
        labels=d.get("labels"),
    )


def fpca_to_dict(m: FpcaModel) -> dict:
    return {
        "lambda": m.lam,
        "q": m.q,
        "eigenvalues": m.eigenvalues.tolist(),
        "weight_coefs": _mat(m.weight_coefs),
        "beta_coefs": _mat(m.beta_coefs),
        "scores": _mat(m.scores),
        "chol_L": _mat(m.chol_L),
        "shrink": m.shrink,
        "shrink_intensity": m.shrink_intensity,
        "basis": m.basis.to_dict(),
    }


def fpca_from_dict(d: dict) -> FpcaModel:
    eig = np.array(d["eigenvalues"], dtype=float)
    return FpcaModel(
        basis=BasisSystem.from_dict(d["basis"]),
        lam=d["lambda"],
        q_max=eig.size,
        eigenvalues=eig,
        weight_coefs=_unmat(d["weight_coefs"]),
        beta_coefs=_unmat(d["beta_coefs"]),
        scores=_unmat(d["scores"]),
        chol_L=_unmat(d["chol_L"]),
        shrink=d.get("shrink", False),
        shrink_intensity=d.get("shrink_intensity", 0.0),
    )


def fica_to_dict(m: FicaModel) -> dict:
    return {
        "q": m.q,
        "rho": m.kurtosis_eigenvalues.tolist(),
        "rotation": _mat(m.rotation),
        "whitener": _mat(m.whitener),
        "white_scores": _mat(m.white_scores),
        "psi_coefs": _mat(m.psi_coefs),
        "component_scores": _mat(m.component_scores),
        "white_component_scores": _mat(m.white_component_scores),
        "basis": m.basis.to_dict(),
    }


def fica_from_dict(d: dict) -> FicaModel:
    return FicaModel(
        basis=BasisSystem.from_dict(d["basis"]),
        q=d["q"],
        whitener=_unmat(d["whitener"]),
        white_scores=_unmat(d["white_scores"]),
        kurtosis_eigenvalues=np.array(d["rho"], dtype=float),
        rotation=_unmat(d["rotation"]),
        psi_coefs=_unmat(d["psi_coefs"]),
        component_scores=_unmat(d["component_scores"]),
        white_component_scores=_unmat(d["white_component_scores"]),
    )


def tuning_to_dict(t: TuningResult) -> dict:
    return {
        "lambda_grid": t.lambda_grid.tolist(),
        "ell": t.ell,
        "bcv": _mat(t.bcv),
        "cv": None if t.cv is None else _mat(t.cv),
        "j0": t.j0,
        "j0_fallback": t.j0_fallback,
        "q_star": t.q_star,
        "lambda_star": t.lambda_star,
        "log_bcv_star": t.log_bcv_star,
        "flags": t.flags,
    }


def tuning_surface_csv(t: TuningResult) -> str:
    """(q, lambda, bcv) rows for plotting."""
    buf = _io.StringIO()
    buf.write("q,lambda,bcv\n")
    for qi in range(t.bcv.shape[0]):
        for li, lam in enumerate(t.lambda_grid):
            buf.write(f"{qi + 1},{fmt(lam)},{fmt(t.bcv[qi, li])}\n")
    return buf.getvalue()


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def synth_bundle_to_dict(spec: MixtureSpec, truth: GroundTruth) -> dict:
    """Self-contained mixture bundle (observed data plus planted truth)."""
    return {
        "kind": "fica-synth-bundle",
        "spec": {
            "n_channels": spec.n_channels,
            "n_samples": spec.n_samples,
            "n_sources": spec.n_sources,
            "artifact_count": spec.artifact_count,
            "artifact_kind": spec.artifact_kind,
            "snr_db": None if np.isinf(spec.snr_db) else spec.snr_db,
            "seed": spec.seed,
        },
        "times": truth.times.tolist(),
        "observed": _mat(truth.observed),
        "clean": _mat(truth.clean),
        "artifact_part": _mat(truth.artifact_part),
        "sources": _mat(truth.sources),
        "mixing": _mat(truth.mixing),
    }


def synth_bundle_from_dict(d: dict) -> tuple[SignalSample, GroundTruth]:
    if d.get("kind") != "fica-synth-bundle":
        raise InvalidInputError("not a synth bundle")
    times = np.array(d["times"], dtype=float)
    observed = _unmat(d["observed"])
    clean = _unmat(d["clean"])
    artifact = _unmat(d["artifact_part"])
    truth = GroundTruth(
        times=times,
        sources=_unmat(d["sources"]),
        mixing=_unmat(d["mixing"]),
        clean=clean,
        artifact_part=artifact,
        observed=observed,
        noise=(observed - clean) - artifact,
    )
    return SignalSample.from_matrix(observed, times=times), truth
