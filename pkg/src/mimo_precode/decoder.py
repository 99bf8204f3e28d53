"""Maximum-likelihood decoding.

The cross structure splits the word metric into independent 2x2 pair
subsystems.  Real-valued pair blocks decode with a QR step plus a sweep of
sqrt(M) conditional quantizations per real dimension; pairs that load only
the strong subchannel decode with no search at all, by quantizing onto the
superposed M^2 grid and splitting the result.  An exhaustive oracle over the
full metric backs every fast path in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .baselines import y_codebook
from .channel import ChannelDecomposition
from .constellation import decompose_superposed, make_qam
from .errors import DegenerateChannelError, UnsupportedCombinationError
from .system import AssembledPrecoder

__all__ = [
    "ReceivedWord",
    "DecodeResult",
    "quantize_pam",
    "decode_pair_fast",
    "decode_scalar_case",
    "decode_word",
    "decode_oracle",
]


@dataclass(frozen=True)
class ReceivedWord:
    """A received vector before rotation, its rotated form, and the SNR."""

    y: np.ndarray
    y_rot: np.ndarray
    snr_linear: float

    @classmethod
    def from_raw(cls, y: np.ndarray, decomp: ChannelDecomposition,
                 snr_linear: float) -> "ReceivedWord":
        y = np.asarray(y, dtype=complex)
        y_rot = (decomp.U.conj().T @ y)[: decomp.n_min]
        return cls(y=y, y_rot=y_rot, snr_linear=snr_linear)


@dataclass(frozen=True)
class DecodeResult:
    x_hat: np.ndarray
    metric: float
    searched_points: int


def _round_half_up(m):
    return np.floor(np.asarray(m, dtype=float) + 0.5)


def _quantize_pam_scalar(u: float, levels_count: int) -> float:
    lev = 2.0 * math.floor((u + 1.0) / 2.0 + 0.5) - 1.0
    top = float(levels_count - 1)
    return -top if lev < -top else (top if lev > top else lev)


def quantize_pam(u, levels_count: int):
    """Nearest odd-integer level to u among the levels_count-PAM alphabet.

    Ties round toward the larger level.  Accepts scalars or arrays.
    """
    if isinstance(u, (float, int)):
        return _quantize_pam_scalar(float(u), levels_count)
    lev = 2.0 * _round_half_up(np.asarray(u, dtype=float) / 2.0 + 0.5) - 1.0
    return np.clip(lev, -(levels_count - 1), levels_count - 1)


@lru_cache(maxsize=None)
def _pam_level_tuple(order: int) -> tuple[float, ...]:
    return tuple(float(v) for v in make_qam(order).pam_levels)


def decode_pair_fast(y2: np.ndarray, block: np.ndarray, order: int,
                     snr_scale: float) -> tuple[np.ndarray, float, int]:
    """Exact ML decision for a real-valued 2x2 pair block.

    QR-rotates the pair observation, then for each candidate of the second
    symbol quantizes the first conditionally; real and imaginary parts solve
    independently.  Returns (two decoded symbols, metric, searched points);
    the search count is 2 sqrt(M).

    Raises
    ------
    DegenerateChannelError
        If the block is rank deficient.
    """
    B = np.asarray(block)
    if np.iscomplexobj(B):
        if np.abs(B.imag).max() > 0.0:
            raise ValueError("fast pair decoding expects a real-valued block")
        B = B.real
    levels = _pam_level_tuple(order)
    root = len(levels)
    b00, b01 = float(B[0, 0]), float(B[0, 1])
    b10, b11 = float(B[1, 0]), float(B[1, 1])
    r = math.hypot(b00, b10)
    if r <= 0.0 or b00 * b11 - b01 * b10 == 0.0:
        raise DegenerateChannelError("pair block is rank deficient")
    c, s = b00 / r, b10 / r
    r01 = c * b01 + s * b11
    r11 = -s * b01 + c * b11
    y0, y1 = complex(y2[0]), complex(y2[1])
    # rotated observation Q^T y
    p0 = (c * y0.real + s * y1.real, c * y0.imag + s * y1.imag)
    p1 = (-s * y0.real + c * y1.real, -s * y0.imag + c * y1.imag)

    halves = []
    metric = 0.0
    for a0, a1 in zip(p0, p1):
        best_m = math.inf
        best = (0.0, 0.0)
        for x2 in levels:
            u = (a0 / snr_scale - r01 * x2) / r
            x1 = _quantize_pam_scalar(u, root)
            e0 = a0 - snr_scale * (r * x1 + r01 * x2)
            e1 = a1 - snr_scale * r11 * x2
            m = e0 * e0 + e1 * e1
            if m < best_m:
                best_m = m
                best = (x1, x2)
        halves.append(best)
        metric += best_m
    x_hat = np.array(
        [complex(halves[0][0], halves[1][0]), complex(halves[0][1], halves[1][1])]
    )
    return x_hat, metric, 2 * root


def decode_scalar_case(y1: complex, gain: float, order: int) -> tuple[np.ndarray, float, int]:
    """Search-free decision when the pair transmits only on its strong subchannel.

    The observation is gain * (sqrt(M) x1 + x2) plus noise; quantizing each
    real dimension onto the M^2 grid and splitting the result recovers both
    symbols with zero searched points.
    """
    re = quantize_pam(y1.real / gain, order)
    im = quantize_pam(y1.imag / gain, order)
    xp = complex(re, im)
    x1, x2 = decompose_superposed(xp, order)
    metric = abs(y1 - gain * xp) ** 2
    return np.array([x1, x2]), float(metric), 0


@lru_cache(maxsize=None)
def _pam_grid(order: int, dims: int) -> np.ndarray:
    """All PAM^dims candidate columns, lexicographic in the level indices."""
    levels = make_qam(order).pam_levels.astype(float)
    grids = np.meshgrid(*[levels] * dims, indexing="ij")
    out = np.stack([g.ravel() for g in grids], axis=0)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _qam_pair_grid(order: int) -> np.ndarray:
    """All (x1, x2) QAM pair candidates as a 2 x M^2 complex array."""
    pts = make_qam(order).points
    a, b = np.meshgrid(pts, pts, indexing="ij")
    out = np.stack([a.ravel(), b.ravel()], axis=0)
    out.setflags(write=False)
    return out


def _decode_pair_exhaustive(y2: np.ndarray, block: np.ndarray, order: int,
                            snr_scale: float) -> tuple[np.ndarray, float, int]:
    """Joint complex pair search (used for the complex-valued baseline)."""
    cands = _qam_pair_grid(order)
    resid = np.asarray(y2, dtype=complex)[:, None] - snr_scale * (block @ cands)
    metrics = np.abs(resid[0]) ** 2 + np.abs(resid[1]) ** 2
    best = int(np.argmin(metrics))
    return cands[:, best].copy(), float(metrics[best]), cands.shape[1]


def _y_sublattice_quantize(obs: float, gain: float, order: int, parity: int) -> float:
    """Nearest wide coordinate with index parity `parity` (0 even, 1 odd)."""
    # coords for 1-based index l: 2l - order - 1; fixed parity -> step 4
    base = 2.0 * (2 - parity) - order - 1.0  # smallest coord of that parity
    top = base + 4.0 * (order // 2 - 1)
    if gain <= 0.0:
        return base
    k = _round_half_up((obs / gain - base) / 4.0)
    return float(np.clip(base + 4.0 * k, base, top))


def _decode_y_symbol(obs_wide: float, obs_sign: float, gain_wide: float,
                     gain_sign: float, order: int) -> tuple[float, float]:
    """Exact ML over the 2D codebook from its two real observations."""
    best = None
    for parity, sign in ((0, 1.0), (1, -1.0)):
        coord = _y_sublattice_quantize(obs_wide, gain_wide, order, parity)
        m = (obs_wide - gain_wide * coord) ** 2 + (obs_sign - gain_sign * sign) ** 2
        if best is None or m < best[0]:
            best = (m, coord, sign)
    return best[1], best[2]


def _pair_indices(n_min: int, i: int) -> tuple[int, int]:
    return i - 1, n_min - i


def decode_word(word: ReceivedWord, decomp: ChannelDecomposition,
                assembled: AssembledPrecoder, order: int) -> DecodeResult:
    """ML decision for a full received word under the given precoder.

    Cross-structured kinds split into per-pair subsystems; each pair uses the
    search-free path when its profile segment allows it and the conditional
    sweep otherwise.  The complex-valued baseline searches its M^2 pair
    candidates; the 2D-codebook scheme quantizes per coordinate; rotations
    wider than one pair fall back to a per-half exhaustive search.
    """
    n_min = assembled.n_min
    snr_scale = math.sqrt(word.snr_linear / assembled.n_t) * assembled.energy_scale
    y = word.y_rot[:n_min]
    sig = decomp.sigmas
    kind = assembled.kind

    if kind == "lattice" and n_min > 2:
        G_eff = sig[:, None] * assembled.P[:n_min].real
        cands = _pam_grid(order, n_min)
        x_hat = np.empty(n_min, dtype=complex)
        metric = 0.0
        proj = snr_scale * (G_eff @ cands)
        for part, setter in ((y.real, "real"), (y.imag, "imag")):
            m = ((part[:, None] - proj) ** 2).sum(axis=0)
            best = int(np.argmin(m))
            metric += float(m[best])
            if setter == "real":
                x_hat = cands[:, best].astype(complex)
            else:
                x_hat = x_hat + 1j * cands[:, best]
        return DecodeResult(x_hat=x_hat, metric=metric,
                            searched_points=2 * cands.shape[1])

    x_hat = np.empty(n_min, dtype=complex)
    metric = 0.0
    searched = 0
    for meta in assembled.pair_meta:
        r, c = _pair_indices(n_min, meta.index)
        y_pair = y[[r, c]]
        if kind == "y":
            a, b = meta.y_gains
            gw = math.sqrt(word.snr_linear / assembled.n_t) * sig[r] * a
            gs = math.sqrt(word.snr_linear / assembled.n_t) * sig[c] * b
            wide_re, sign_re = _decode_y_symbol(y_pair[0].real, y_pair[1].real, gw, gs, order)
            wide_im, sign_im = _decode_y_symbol(y_pair[0].imag, y_pair[1].imag, gw, gs, order)
            x_hat[r] = complex(wide_re, wide_im)
            x_hat[c] = complex(sign_re, sign_im)
            metric += (
                abs(y_pair[0] - gw * complex(wide_re, wide_im)) ** 2
                + abs(y_pair[1] - gs * complex(sign_re, sign_im)) ** 2
            )
            searched += 0
            continue
        P = assembled.P
        if kind == "edmin":
            block = np.array([[sig[r] * P[r, r], sig[r] * P[r, c]],
                              [sig[c] * P[c, r], sig[c] * P[c, c]]])
            pair_hat, m, n = _decode_pair_exhaustive(y_pair, block, order, snr_scale)
        elif kind == "proposed" and meta.searchless:
            root = int(math.isqrt(order))
            gain = snr_scale * sig[r] * P[r, r].real / root
            # top row is gain * (sqrt(M) x1 - x2); decode then flip the sign
            pair_hat, m, n = decode_scalar_case(complex(y_pair[0]), gain, order)
            pair_hat[1] = -pair_hat[1]
            m += abs(y_pair[1]) ** 2
        else:
            block = np.array([[sig[r] * P[r, r].real, sig[r] * P[r, c].real],
                              [sig[c] * P[c, r].real, sig[c] * P[c, c].real]])
            pair_hat, m, n = decode_pair_fast(y_pair, block, order, snr_scale)
        x_hat[r], x_hat[c] = pair_hat
        metric += m
        searched += n
    return DecodeResult(x_hat=x_hat, metric=float(metric), searched_points=searched)


def decode_oracle(word: ReceivedWord, decomp: ChannelDecomposition,
                  assembled: AssembledPrecoder, order: int) -> DecodeResult:
    """Brute-force minimization of the word metric over the full alphabet.

    Splits real and imaginary halves only when the effective matrix is real
    (which preserves exactness).  Guarded to 2^20 candidate words.

    Raises
    ------
    UnsupportedCombinationError
        If the search space exceeds the guard.
    """
    n_min = assembled.n_min
    if order ** n_min > 2 ** 20:
        raise UnsupportedCombinationError("oracle search space exceeds 2^20 words")
    snr_scale = math.sqrt(word.snr_linear / assembled.n_t) * assembled.energy_scale
    y = word.y_rot[:n_min]
    sig = decomp.sigmas

    if assembled.kind == "y":
        base = math.sqrt(word.snr_linear / assembled.n_t)
        codebook = y_codebook(order)
        x_hat = np.empty(n_min, dtype=complex)
        metric = 0.0
        searched = 0
        for meta in assembled.pair_meta:
            r, c = _pair_indices(n_min, meta.index)
            a, b = meta.y_gains
            gw, gs = base * sig[r] * a, base * sig[c] * b
            wide = codebook[:, 0].astype(float)
            sign = codebook[:, 1].astype(float)
            for part in ("real", "imag"):
                ow = getattr(y[r], part)
                os_ = getattr(y[c], part)
                m = (ow - gw * wide) ** 2 + (os_ - gs * sign) ** 2
                best = int(np.argmin(m))
                metric += float(m[best])
                if part == "real":
                    x_hat[r] = wide[best]
                    x_hat[c] = sign[best]
                else:
                    x_hat[r] += 1j * wide[best]
                    x_hat[c] += 1j * sign[best]
                searched += order
        return DecodeResult(x_hat=x_hat, metric=float(metric), searched_points=searched)

    G_eff = sig[:, None] * assembled.P[:n_min]
    if np.abs(G_eff.imag).max() == 0.0:
        G = G_eff.real
        cands = _pam_grid(order, n_min)
        proj = snr_scale * (G @ cands)
        x_hat = np.empty(n_min, dtype=complex)
        metric = 0.0
        for part in ("real", "imag"):
            m = ((getattr(y, part)[:, None] - proj) ** 2).sum(axis=0)
            best = int(np.argmin(m))
            metric += float(m[best])
            if part == "real":
                x_hat = cands[:, best].astype(complex)
            else:
                x_hat = x_hat + 1j * cands[:, best]
        return DecodeResult(x_hat=x_hat, metric=float(metric),
                            searched_points=2 * cands.shape[1])

    pts = make_qam(order).points
    grids = np.meshgrid(*[pts] * n_min, indexing="ij")
    cands = np.stack([g.ravel() for g in grids], axis=0)
    resid = y[:, None] - snr_scale * (G_eff @ cands)
    metrics = (np.abs(resid) ** 2).sum(axis=0)
    best = int(np.argmin(metrics))
    return DecodeResult(x_hat=cands[:, best].copy(), metric=float(metrics[best]),
                        searched_points=cands.shape[1])
