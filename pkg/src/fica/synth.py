"""Synthetic ground-truth mixtures and separation-quality metrics.

Brain-like sources are random-phase band-limited oscillations mixed with
dense spatial patterns; artifact sources are sparse high-amplitude events
(kurtotic in time) mixed through spatially localized channel profiles, the
combination that makes them stand out to the kurtosis operator the way
ocular and movement artifacts do on a real montage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import SignalSample
from .errors import InvalidConfigError, InvalidInputError, MetricUndefinedError

__all__ = [
    "MixtureSpec",
    "GroundTruth",
    "MatchResult",
    "generate",
    "match_correlation",
    "amari_index",
]

ARTIFACT_KINDS = ("low_freq_burst", "blink_like", "step_drift")

# amplitude of artifact sources relative to unit-RMS brain sources, and the
# spatial concentration (gaussian width in channel index units) of their
# mixing columns
ARTIFACT_GAIN = 4.0
ARTIFACT_SPATIAL_WIDTH = 1.5


@dataclass
class MixtureSpec:
    """Configuration of one synthetic multichannel recording."""

    n_channels: int = 32
    n_samples: int = 1500
    n_sources: int = 4
    artifact_count: int = 1
    artifact_kind: str = "low_freq_burst"
    snr_db: float = 10.0
    seed: int = 0

    def validate(self):
        if self.n_samples < 100:
            raise InvalidConfigError(f"n_samples must be >= 100, got {self.n_samples}")
        if self.n_channels < 2:
            raise InvalidConfigError(f"n_channels must be >= 2, got {self.n_channels}")
        if not 0 <= self.artifact_count <= self.n_sources:
            raise InvalidConfigError(
                f"artifact_count {self.artifact_count} exceeds n_sources {self.n_sources}"
            )
        if self.artifact_kind not in ARTIFACT_KINDS:
            raise InvalidConfigError(
                f"artifact_kind must be one of {ARTIFACT_KINDS}, got {self.artifact_kind!r}"
            )


@dataclass
class GroundTruth:
    """Planted sources, mixing and noise next to the observed mixture.

    ``noise`` is stored as ``(observed - clean) - artifact_part`` so the
    bookkeeping identity holds exactly in floating point.
    """

    times: np.ndarray
    sources: np.ndarray
    mixing: np.ndarray
    clean: np.ndarray
    artifact_part: np.ndarray
    observed: np.ndarray
    noise: np.ndarray


def _brain_source(rng: np.random.Generator, ts: np.ndarray) -> np.ndarray:
    x = np.zeros_like(ts)
    for k in range(2, 10):
        amp = rng.standard_normal() / math.sqrt(k)
        x += amp * np.sin(2 * np.pi * k * ts + rng.uniform(0, 2 * np.pi))
    return x / max(float(np.std(x)), 1e-12)


def _artifact_source(rng: np.random.Generator, ts: np.ndarray, kind: str) -> np.ndarray:
    x = np.zeros_like(ts)
    if kind == "low_freq_burst":
        # narrow envelopes keep the source sparse in time, hence kurtotic
        for _ in range(int(rng.integers(1, 3))):
            c = rng.uniform(0.15, 0.85)
            w = rng.uniform(0.02, 0.05)
            f = rng.uniform(1.0, 3.0)
            x += np.exp(-0.5 * ((ts - c) / w) ** 2) * np.sin(
                2 * np.pi * f * (ts - c) + rng.uniform(0, 2 * np.pi)
            )
    elif kind == "blink_like":
        for _ in range(int(rng.integers(2, 5))):
            c = rng.uniform(0.1, 0.9)
            tau = rng.uniform(0.008, 0.02)
            u = (ts - c) / tau
            pulse = np.where(u > 0, u * np.exp(1.0 - u), 0.0)
            x += rng.choice([-1.0, 1.0]) * pulse
    elif kind == "step_drift":
        c = rng.uniform(0.2, 0.7)
        w = rng.uniform(0.05, 0.12)
        u = np.clip((ts - c) / (0.15 * w), 0.0, 1.0)
        d = np.clip((ts - c - w) / (0.15 * w), 0.0, 1.0)
        x = (u * u * (3 - 2 * u)) - (d * d * (3 - 2 * d))
    return x / max(float(np.std(x)), 1e-12)


def generate(spec: MixtureSpec) -> tuple[SignalSample, GroundTruth]:
    """Deterministic synthetic mixture for the given spec and seed."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    ts = np.linspace(0.0, 1.0, spec.n_samples)
    n_brain = spec.n_sources - spec.artifact_count
    rows = [_brain_source(rng, ts) for _ in range(n_brain)]
    rows += [
        ARTIFACT_GAIN * _artifact_source(rng, ts, spec.artifact_kind)
        for _ in range(spec.artifact_count)
    ]
    sources = np.vstack(rows) if rows else np.zeros((0, ts.size))

    mixing = rng.standard_normal((spec.n_channels, spec.n_sources))
    idx = np.arange(spec.n_channels, dtype=float)
    for j in range(n_brain, spec.n_sources):
        center = rng.uniform(0, spec.n_channels)
        profile = np.exp(-0.5 * ((idx - center) / ARTIFACT_SPATIAL_WIDTH) ** 2)
        mixing[:, j] = profile * rng.choice([-1.0, 1.0])
    mixing /= np.linalg.norm(mixing, axis=0)

    clean = mixing[:, :n_brain] @ sources[:n_brain]
    artifact_part = mixing[:, n_brain:] @ sources[n_brain:]
    signal = clean + artifact_part
    if math.isinf(spec.snr_db):
        observed = signal.copy()
    else:
        power = float(np.mean(signal**2))
        sigma = math.sqrt(power / 10.0 ** (spec.snr_db / 10.0))
        observed = signal + sigma * rng.standard_normal(signal.shape)
    noise = (observed - clean) - artifact_part

    sample = SignalSample.from_matrix(observed, times=ts)
    truth = GroundTruth(
        times=ts,
        sources=sources,
        mixing=mixing,
        clean=clean,
        artifact_part=artifact_part,
        observed=observed,
        noise=noise,
    )
    return sample, truth


@dataclass
class MatchResult:
    """Greedy component-to-source assignment by absolute correlation."""

    assignment: list[tuple[int, int, float]]
    mean_abs_corr: float
    excluded: list[int]


def match_correlation(estimated: np.ndarray, truth: np.ndarray) -> MatchResult:
    """Greedily match estimated time courses to true sources by |corr|.

    ``estimated`` holds one component per column on the sampling grid;
    ``truth`` one source per row. Zero-variance components are excluded and
    reported. Matching is without replacement, largest |corr| first.
    """
    E = np.atleast_2d(np.asarray(estimated, dtype=float))
    S = np.atleast_2d(np.asarray(truth, dtype=float))
    if E.shape[0] != S.shape[1]:
        raise InvalidInputError(
            f"estimated has {E.shape[0]} samples but sources have {S.shape[1]}"
        )
    if E.shape[1] == 0:
        raise InvalidInputError("no estimated components")
    excluded = [j for j in range(E.shape[1]) if np.std(E[:, j]) == 0.0]
    usable = [j for j in range(E.shape[1]) if j not in excluded]
    src = [i for i in range(S.shape[0]) if np.std(S[i]) > 0.0]
    corr = np.zeros((len(usable), len(src)))
    for a, j in enumerate(usable):
        for b, i in enumerate(src):
            corr[a, b] = abs(float(np.corrcoef(E[:, j], S[i])[0, 1]))
    assignment = []
    work = corr.copy()
    for _ in range(min(len(usable), len(src))):
        a, b = np.unravel_index(int(np.argmax(work)), work.shape)
        assignment.append((usable[a], src[b], float(work[a, b])))
        work[a, :] = -1.0
        work[:, b] = -1.0
    mean = float(np.mean([c for *_, c in assignment])) if assignment else 0.0
    return MatchResult(assignment=assignment, mean_abs_corr=mean, excluded=excluded)


def amari_index(estimate_unmixing: np.ndarray, true_mixing: np.ndarray) -> float:
    """Row-normalized Amari separation error of P = W M, in [0, 1/2].

    Zero exactly when P is a scaled permutation (each row carries a single
    nonzero entry); invariant under row rescaling, matching the scale
    indeterminacy of separation. Normalization is 2 q (q - 1).
    """
    W = np.asarray(estimate_unmixing, dtype=float)
    M = np.asarray(true_mixing, dtype=float)
    if W.ndim != 2 or M.ndim != 2 or W.shape[0] != W.shape[1] or W.shape != M.shape:
        raise InvalidInputError("matrices must be square and of equal shape")
    q = W.shape[0]
    if q < 2:
        raise InvalidInputError("index needs at least 2 components")
    P = np.abs(W @ M)
    row_max = P.max(axis=1)
    if np.any(row_max == 0.0) or not np.all(np.isfinite(P)):
        raise MetricUndefinedError("mixing-unmixing product has a vanishing row")
    total = float((P.sum(axis=1) / row_max - 1.0).sum())
    return total / (2.0 * q * (q - 1.0))
