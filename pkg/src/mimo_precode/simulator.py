"""Monte Carlo engine: word-error curves, distance-spread statistics,
search-free probabilities, and diversity-slope estimates.

Every trial derives its randomness from (seed, point index, trial index), so
results are reproducible bit for bit regardless of the worker count, and
different precoder kinds see common channel / word / noise draws for paired
comparisons.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import XLookup, LatticeGenerator, build_x_lookup, lattice_precoder, y_codebook
from .channel import decompose, sample_rayleigh, trial_rng
from .constellation import make_qam
from .decoder import ReceivedWord, decode_word
from .errors import UnsupportedCombinationError
from .optimizer import PrecoderProfile, build_profile, profile_delta
from .system import PRECODER_KINDS, assemble

__all__ = [
    "SimConfig",
    "WepPoint",
    "SimContext",
    "prepare_context",
    "run_wep",
    "run_zeta_stats",
    "run_nosearch",
    "estimate_slope",
]


@dataclass(frozen=True)
class SimConfig:
    n_t: int
    n_r: int
    order: int
    kind: str
    snr_grid_db: tuple[float, ...]
    trials_per_point: int
    seed: int
    worker_hint: int = 1

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be at least 1")
        grid = tuple(self.snr_grid_db)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr_grid_db must be strictly increasing")
        if self.kind not in PRECODER_KINDS:
            raise UnsupportedCombinationError(f"unknown precoder kind {self.kind!r}")


@dataclass(frozen=True)
class WepPoint:
    snr_db: float
    word_errors: int
    trials: int
    wep: float
    ci_halfwidth: float


@dataclass(frozen=True)
class SimContext:
    """Precomputed kind-specific inputs shared by all trials."""

    profile: PrecoderProfile | None = None
    x_lookup: XLookup | None = None
    rotation: LatticeGenerator | None = None


def prepare_context(kind: str, order: int, n_min: int,
                    profile: PrecoderProfile | None = None) -> SimContext:
    """Build (or accept) the profile / lookup / rotation a kind needs."""
    if kind == "proposed":
        return SimContext(profile=profile or build_profile(order))
    if kind == "x" and order > 4:
        return SimContext(x_lookup=build_x_lookup(order))
    if kind == "lattice":
        return SimContext(rotation=lattice_precoder(n_min))
    return SimContext()


def _confidence_halfwidth(errors: int, trials: int) -> float:
    """95% halfwidth: normal approximation, Wilson when counts are small."""
    z = 1.959963984540054
    p = errors / trials
    if errors >= 30:
        return z * math.sqrt(p * (1.0 - p) / trials)
    denom = 1.0 + z * z / trials
    return z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom


def _draw_word(kind: str, order: int, n_min: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform information word, mapped to the transmit vector."""
    idx = rng.integers(0, order, n_min)
    if kind != "y":
        return make_qam(order).points[idx]
    codebook = y_codebook(order)
    x = np.empty(n_min, dtype=complex)
    for i in range(n_min // 2):
        j = n_min - 1 - i
        vi, vj = codebook[idx[i]], codebook[idx[j]]
        x[i] = complex(vi[0], vj[0])
        x[j] = complex(vi[1], vj[1])
    return x


def _run_trial(cfg: SimConfig, ctx: SimContext, point_idx: int, trial_idx: int,
               snr_linear: float) -> bool:
    rng = trial_rng(cfg.seed, point_idx, trial_idx)
    ch = sample_rayleigh(cfg.n_r, cfg.n_t, rng)
    d = decompose(ch)
    asm = assemble(d, cfg.kind, cfg.order, profile=ctx.profile,
                   x_lookup=ctx.x_lookup, rotation=ctx.rotation)
    x = _draw_word(cfg.kind, cfg.order, d.n_min, rng)
    gauss = rng.standard_normal((cfg.n_r, 2))
    noise = math.sqrt(0.5) * (gauss[:, 0] + 1j * gauss[:, 1])
    s = asm.energy_scale * (d.V @ (asm.P @ x))
    y = math.sqrt(snr_linear / cfg.n_t) * (ch.H @ s) + noise
    word = ReceivedWord.from_raw(y, d, snr_linear)
    res = decode_word(word, d, asm, cfg.order)
    return not np.array_equal(res.x_hat, x)


def _run_chunk(args) -> int:
    cfg, ctx, point_idx, start, stop, snr_linear = args
    errors = 0
    for t in range(start, stop):
        errors += _run_trial(cfg, ctx, point_idx, t, snr_linear)
    return errors


def run_wep(cfg: SimConfig, context: SimContext | None = None) -> list[WepPoint]:
    """Word-error probability over the configured SNR grid.

    A word error is any decoded symbol differing from the transmitted one.
    worker_hint > 1 runs fixed trial chunks in a process pool; the chunking
    never affects results, only wall time.
    """
    ctx = context if context is not None else prepare_context(
        cfg.kind, cfg.order, min(cfg.n_t, cfg.n_r))
    points = []
    n_workers = max(1, cfg.worker_hint)
    for point_idx, snr_db in enumerate(cfg.snr_grid_db):
        snr_linear = 10.0 ** (snr_db / 10.0)
        trials = cfg.trials_per_point
        if n_workers == 1:
            errors = _run_chunk((cfg, ctx, point_idx, 0, trials, snr_linear))
        else:
            chunk = max(1, math.ceil(trials / (4 * n_workers)))
            tasks = [
                (cfg, ctx, point_idx, lo, min(lo + chunk, trials), snr_linear)
                for lo in range(0, trials, chunk)
            ]
            try:
                with ProcessPoolExecutor(max_workers=n_workers) as pool:
                    errors = sum(pool.map(_run_chunk, tasks))
            except OSError:
                errors = _run_chunk((cfg, ctx, point_idx, 0, trials, snr_linear))
        points.append(
            WepPoint(
                snr_db=float(snr_db),
                word_errors=int(errors),
                trials=trials,
                wep=errors / trials,
                ci_halfwidth=_confidence_halfwidth(errors, trials),
            )
        )
    return points


def _batched_sigmas(n_t: int, n_r: int, trials: int, seed: int,
                    chunk: int = 32768):
    """Yield stacked singular values for per-trial substream channel draws."""
    scale = math.sqrt(0.5)
    for lo in range(0, trials, chunk):
        hi = min(lo + chunk, trials)
        H = np.empty((hi - lo, n_r, n_t), dtype=complex)
        for t in range(lo, hi):
            g = trial_rng(seed, t).standard_normal((n_r, n_t, 2))
            H[t - lo] = scale * (g[..., 0] + 1j * g[..., 1])
        yield np.linalg.svd(H, compute_uv=False)


def run_zeta_stats(n_t: int, n_r: int, order: int, trials: int, seed: int,
                   profile: PrecoderProfile | None = None) -> tuple[float, float]:
    """Empirical minimum and P(< 1) of the equalization ratio over channel draws.

    The ratio compares the equalized distance constant to the best pair's
    unequalized one; for a single pair it is identically 1 and P is 0.
    """
    n_min = min(n_t, n_r)
    if n_min % 2 != 0:
        raise UnsupportedCombinationError("pairing requires an even number of subchannels")
    if n_min == 2:
        return 1.0, 0.0
    profile = profile or build_profile(order)
    half = n_min // 2
    zeta_min = math.inf
    below = 0
    for sig in _batched_sigmas(n_t, n_r, trials, seed):
        strong = sig[:, :half]
        weak = sig[:, : half - 1 - n_min : -1]
        gammas = np.arctan2(weak, strong)
        rho_sq = strong**2 + weak**2
        deltas = profile_delta(profile, gammas)
        inv = 1.0 / (rho_sq * deltas)
        eta_sq = (n_min / 2.0) / inv.sum(axis=1)
        zeta = np.sqrt(eta_sq * inv[:, 0])
        zeta_min = min(zeta_min, float(zeta.min()))
        below += int((zeta < 1.0).sum())
    return zeta_min, below / trials


def run_nosearch(n_t: int, n_r: int, order: int, trials: int, seed: int,
                 profile: PrecoderProfile | None = None) -> list[tuple[int, float]]:
    """Per-pair probability that decoding needs no search over signal points.

    A pair is search-free when its singular-value ratio stays below the first
    profile boundary, i.e. the pair lands on the quantization-only segment.
    """
    n_min = min(n_t, n_r)
    if n_min % 2 != 0:
        raise UnsupportedCombinationError("pairing requires an even number of subchannels")
    profile = profile or build_profile(order)
    threshold = math.tan(profile.segments[0].gamma_hi)
    half = n_min // 2
    counts = np.zeros(half, dtype=np.int64)
    for sig in _batched_sigmas(n_t, n_r, trials, seed):
        strong = sig[:, :half]
        weak = sig[:, : half - 1 - n_min : -1]
        counts += (weak <= threshold * strong).sum(axis=0)
    return [(i + 1, counts[i] / trials) for i in range(half)]


def estimate_slope(curve: list[WepPoint], window: tuple[float, float],
                   min_errors: int = 20) -> float:
    """Least-squares slope of log10(wep) against snr_db / 10 inside the window.

    An estimate of the negative diversity order.  Points with fewer than
    min_errors word errors are excluded; at least two must remain.
    """
    lo, hi = window
    xs, ys = [], []
    for pt in curve:
        if lo <= pt.snr_db <= hi and pt.word_errors >= min_errors:
            xs.append(pt.snr_db / 10.0)
            ys.append(math.log10(pt.wep))
    if len(xs) < 2:
        raise ValueError("need at least two points with enough errors in the window")
    slope, _ = np.polyfit(np.array(xs), np.array(ys), 1)
    return float(slope)
