"""Command line driver: staged subcommands plus a one-shot pipeline.

Stages communicate through JSON artifacts in a shared working directory so
intermediate results can be inspected between steps. Exit codes: 0 ok,
2 configuration error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import io as fio
from .basis import fit_coefficients, make_basis
from .cleanse import artifact_expansion, evaluate_at, subtract
from .errors import (
    FicaError,
    InvalidConfigError,
    InvalidInputError,
    InvalidSelectionError,
    OutOfDomainError,
)
from .pipeline import (
    PipelineConfig,
    PipelineError,
    decompose_expansion,
    parse_selection,
    run_pipeline,
)
from .synth import MixtureSpec, generate
from .tuning import tune

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _fail(err: Exception) -> int:
    if isinstance(err, PipelineError):
        click.echo(f"error [{err.stage}] code={err.code}: {err.cause}", err=True)
        inner = err.cause
    else:
        code = getattr(err, "code", "error")
        click.echo(f"error code={code}: {err}", err=True)
        inner = err
    if isinstance(inner, (InvalidConfigError, InvalidSelectionError)):
        return EXIT_CONFIG
    if isinstance(inner, (OSError, json.JSONDecodeError, InvalidInputError, OutOfDomainError)):
        return EXIT_IO
    return EXIT_NUMERIC


def _guard(fn):
    def run(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except (FicaError, OSError, json.JSONDecodeError) as err:
            sys.exit(_fail(err))

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@click.group()
def main():
    """Bi-smoothed functional independent component analysis toolkit."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--times", "times_path", type=click.Path(exists=True), default=None)
@click.option("--p", default=230, show_default=True, help="Basis dimension.")
@click.option("--order", default=4, show_default=True, help="B-spline order (degree + 1).")
@click.option("--penalty-order", default=2, show_default=True)
@click.option("--center/--no-center", default=True, show_default=True)
@click.option("--workdir", default="fica_out", show_default=True)
@_guard
def fit(input_path, times_path, p, order, penalty_order, center, workdir):
    """Fit basis coefficients to a signal CSV."""
    sample = fio.read_signal_csv(input_path, times_path)
    basis = make_basis(sample.domain, p, order, penalty_order)
    expansion = fit_coefficients(sample, basis, center)
    out = Path(workdir)
    out.mkdir(parents=True, exist_ok=True)
    payload = fio.expansion_to_dict(expansion)
    shared = sample.shared_times()
    payload["shared_times"] = None if shared is None else shared.tolist()
    fio.write_json(payload, out / "expansion.json")
    click.echo(
        f"fit: {expansion.n} curves, p={p}, order={order}, "
        f"max RSS={fio.fmt(float(expansion.rss.max()))}"
    )


def _load_expansion(workdir, with_times=False):
    path = Path(workdir) / "expansion.json"
    if not path.exists():
        raise InvalidConfigError(f"{path} not found; run `fica fit` first")
    data = json.loads(path.read_text())
    expansion = fio.expansion_from_dict(data)
    if with_times:
        shared = data.get("shared_times")
        return expansion, None if shared is None else np.array(shared, dtype=float)
    return expansion


def _parse_grid(text):
    if text is None:
        return None
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InvalidConfigError(f"bad lambda grid {text!r}") from exc


@main.command(name="tune")
@click.option("--workdir", default="fica_out", show_default=True)
@click.option("--grid", default=None, help="Comma-separated lambda values.")
@click.option("--ell", default=0.1, show_default=True)
@click.option("--shrink", type=click.Choice(["auto", "on", "off"]), default="auto", show_default=True)
@click.option("--max-q", type=int, default=None, help="Cap on the truncation bound.")
@click.option("--with-cv", is_flag=True, help="Also compute classical leave-one-out CV.")
@_guard
def tune_cmd(workdir, grid, ell, shrink, max_q, with_cv):
    """Baseline cross-validation over the lambda grid."""
    expansion = _load_expansion(workdir)
    shrink_opt = {"auto": None, "on": True, "off": False}[shrink]
    result = tune(
        expansion, _parse_grid(grid), ell, shrink_opt, compute_cv=with_cv, max_q=max_q
    )
    out = Path(workdir)
    fio.write_json(fio.tuning_to_dict(result), out / "tuning.json")
    (out / "tuning_surface.csv").write_text(fio.tuning_surface_csv(result))
    log_txt = "-inf" if result.log_bcv_star is None else fio.fmt(result.log_bcv_star)
    click.echo(
        f"tune: j0={result.j0} q*={result.q_star} lambda*={fio.fmt(result.lambda_star)} "
        f"log-bcv={log_txt}"
    )


@main.command()
@click.option("--workdir", default="fica_out", show_default=True)
@click.option("--lam", type=float, default=None, help="Penalty; defaults to tuned lambda*.")
@click.option("--q", type=int, default=None, help="Components; defaults to tuned q*.")
@click.option("--shrink", type=click.Choice(["auto", "on", "off"]), default="auto", show_default=True)
@_guard
def decompose(workdir, lam, q, shrink):
    """Penalized FPCA followed by the kurtosis rotation."""
    expansion = _load_expansion(workdir)
    out = Path(workdir)
    if lam is None or q is None:
        tpath = out / "tuning.json"
        if not tpath.exists():
            raise InvalidConfigError("no --lam/--q given and tuning.json missing")
        tdata = json.loads(tpath.read_text())
        lam = tdata["lambda_star"] if lam is None else lam
        q = tdata["q_star"] if q is None else q
    shrink_opt = {"auto": None, "on": True, "off": False}[shrink]
    model, fica_model = decompose_expansion(expansion, lam, q, shrink_opt)
    fio.write_json(
        {"fpca": fio.fpca_to_dict(model), "fica": fio.fica_to_dict(fica_model)},
        out / "model.json",
    )
    rho = ", ".join(fio.fmt(r) for r in fica_model.kurtosis_eigenvalues)
    click.echo(f"decompose: lambda={fio.fmt(lam)} q={fica_model.q} rho=[{rho}]")


@main.command()
@click.option("--workdir", default="fica_out", show_default=True)
@click.option("--select", "selection", default="all", show_default=True,
              help="all | none | comma list of 1-based components | kurtosis>X")
@click.option("--out", "out_csv", default=None, help="Cleaned CSV path (default workdir/cleaned.csv).")
@click.option("--points", type=int, default=None,
              help="Evaluation grid size (default: the input grid, else 512).")
@_guard
def clean(workdir, selection, out_csv, points):
    """Subtract selected components and export the cleaned signal."""
    expansion, shared_times = _load_expansion(workdir, with_times=True)
    out = Path(workdir)
    mpath = out / "model.json"
    if not mpath.exists():
        # fall back to the tuned parameters so fit -> tune -> clean works
        tpath = out / "tuning.json"
        if not tpath.exists():
            raise InvalidConfigError(
                f"{mpath} not found; run `fica decompose` (or `fica tune`) first"
            )
        tdata = json.loads(tpath.read_text())
        model, fica_model = decompose_expansion(
            expansion, tdata["lambda_star"], tdata["q_star"]
        )
        fio.write_json(
            {"fpca": fio.fpca_to_dict(model), "fica": fio.fica_to_dict(fica_model)},
            mpath,
        )
    mdata = json.loads(mpath.read_text())
    fica_model = fio.fica_from_dict(mdata["fica"])
    selected = parse_selection(selection, fica_model)
    artifact = artifact_expansion(fica_model, selected)
    cleaned = subtract(expansion, artifact, selected)
    if points is None and shared_times is not None:
        times = shared_times
    else:
        lo, hi = expansion.basis.domain
        times = np.linspace(lo, hi, points or 512)
    values = evaluate_at(cleaned, expansion.basis, times, restore_mean=True)
    path = Path(out_csv) if out_csv else out / "cleaned.csv"
    fio.write_signal_csv(values, path)
    fio.write_json(
        {
            "clean_coefs": fio.matrix_dict(cleaned.clean_coefs),
            "artifact_coefs": fio.matrix_dict(cleaned.artifact_coefs),
            "mean_coefs": cleaned.mean_coefs.tolist(),
            "removed": [i + 1 for i in cleaned.removed],
            "basis": expansion.basis.to_dict(),
        },
        out / "cleaned_coefs.json",
    )
    _write_staged_summary(out, expansion, mdata, selected, fica_model)
    click.echo(f"clean: removed {[i + 1 for i in selected]} -> {path}")


def _write_staged_summary(out, expansion, mdata, selected, fica_model):
    """Summary record for the staged flow, mirroring the pipeline columns."""
    from .pipeline import summary_record

    model = fio.fpca_from_dict(mdata["fpca"])
    model0 = (
        model
        if model.lam == 0.0
        else decompose_expansion(expansion, 0.0, fica_model.q, model.shrink)[0]
    )
    tpath = out / "tuning.json"
    tdata = json.loads(tpath.read_text()) if tpath.exists() else {}
    summary = summary_record(
        model.lam,
        fica_model.q,
        model,
        model0,
        j0=tdata.get("j0"),
        log_bcv=tdata.get("log_bcv_star"),
        tuning_flags=tdata.get("flags"),
    )
    summary["selection"] = [i + 1 for i in selected]
    summary["rho"] = fica_model.kurtosis_eigenvalues.tolist()
    fio.write_json(summary, out / "summary.json")


@main.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--channels", default=32, show_default=True)
@click.option("--samples", default=1500, show_default=True)
@click.option("--sources", default=4, show_default=True)
@click.option("--artifacts", default=1, show_default=True)
@click.option("--kind", type=click.Choice(["low_freq_burst", "blink_like", "step_drift"]),
              default="low_freq_burst", show_default=True)
@click.option("--snr", default=10.0, show_default=True, help="SNR in dB; 'inf' disables noise.")
@click.option("--out", "out_dir", default=None,
              help="Write observed/clean/sources CSVs here instead of a stdout bundle.")
@_guard
def synth(seed, channels, samples, sources, artifacts, kind, snr, out_dir):
    """Generate a ground-truth mixture; bundle JSON on stdout by default."""
    spec = MixtureSpec(
        n_channels=channels, n_samples=samples, n_sources=sources,
        artifact_count=artifacts, artifact_kind=kind, snr_db=float(snr), seed=seed,
    )
    _, truth = generate(spec)
    bundle = fio.synth_bundle_to_dict(spec, truth)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        fio.write_signal_csv(truth.observed, out / "observed.csv")
        fio.write_signal_csv(truth.clean, out / "clean.csv")
        fio.write_signal_csv(truth.sources, out / "sources.csv")
        fio.write_signal_csv([truth.times], out / "times.csv")
        fio.write_json(bundle, out / "bundle.json")
        click.echo(f"synth: wrote {out}/observed.csv and bundle.json")
    else:
        click.echo(json.dumps(bundle, sort_keys=True))


@main.command()
@click.option("--input", "input_path", default="-", show_default=True,
              help="Signal CSV, synth bundle JSON, or '-' for stdin.")
@click.option("--times", "times_path", type=click.Path(exists=True), default=None)
@click.option("--p", default=230, show_default=True)
@click.option("--order", default=4, show_default=True)
@click.option("--penalty-order", default=2, show_default=True)
@click.option("--grid", default=None, help="Comma-separated lambda values.")
@click.option("--ell", default=0.1, show_default=True)
@click.option("--lam", type=float, default=None)
@click.option("--q", type=int, default=None)
@click.option("--select", "selection", default="all", show_default=True)
@click.option("--outdir", default="fica_out", show_default=True)
@_guard
def pipeline(input_path, times_path, p, order, penalty_order, grid, ell, lam, q,
             selection, outdir):
    """One-shot run: fit, tune (unless fixed), decompose, clean, export."""
    text = sys.stdin.read() if input_path == "-" else Path(input_path).read_text()
    truth = None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        sample, truth = fio.synth_bundle_from_dict(json.loads(text))
    else:
        times_text = Path(times_path).read_text() if times_path else None
        sample = fio.parse_signal_text(text, times_text)
    config = PipelineConfig(
        p=p, order=order, penalty_order=penalty_order,
        lambda_grid=_parse_grid(grid), ell=ell, lam=lam, q=q,
        selection=selection, outdir=outdir,
    )
    summary = run_pipeline(sample, config, truth=truth)
    click.echo(json.dumps(summary, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True)
@click.option("--frontend", "frontend_dir", default=None,
              help="Directory of built UI assets to serve at /.")
def serve(host, port, frontend_dir):
    """Run the interactive HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(frontend_dir=frontend_dir), host=host, port=port)


if __name__ == "__main__":
    main()
