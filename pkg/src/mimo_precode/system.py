"""Full precoder assembly and power bookkeeping.

The n_t x n_min precoder entangles subchannel i with subchannel n_min - i + 1
in a cross pattern of 2x2 blocks.  For the proposed scheme a diagonal power
control stage equalizes the per-pair worst-case received distance; the
equalized constant also feeds a word-error upper bound and the eta / best-pair
ratio used as a full-diversity diagnostic.

Distances follow the half-difference convention of the optimizer module; the
strict union bound therefore takes 2 * eta (see union_bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .baselines import (
    XLookup,
    LatticeGenerator,
    edmin_delta,
    edmin_pair,
    x_delta,
    x_pair,
    y_delta,
    y_effective,
)
from .channel import ChannelDecomposition, subchannel_pairs
from .constellation import make_qam
from .errors import DegenerateChannelError, UnsupportedCombinationError
from .optimizer import PrecoderProfile, eval_profile

__all__ = [
    "PRECODER_KINDS",
    "PairMeta",
    "AssembledPrecoder",
    "power_control",
    "assemble",
    "union_bound",
    "pair_delta_curve",
    "zeta",
]

PRECODER_KINDS = ("proposed", "edmin", "x", "y", "lattice")


@dataclass(frozen=True)
class PairMeta:
    """Per-pair bookkeeping needed by the decoder and diagnostics."""

    index: int
    gamma: float
    rho: float
    theta: float
    psi: float
    delta: float
    tau: float
    segment: int | None = None
    y_gains: tuple[float, float] | None = None

    @property
    def searchless(self) -> bool:
        """True when the pair decodes by pure quantization (first segment)."""
        return self.segment == 1


@dataclass(frozen=True)
class AssembledPrecoder:
    """A concrete precoder for one channel realization.

    P is the n_t x n_min matrix applied in the right-singular basis (power
    control included); energy_scale is the symbol normalization applied at
    transmit time (1/sqrt(E) for QAM alphabets, 1 for the 2D-codebook scheme,
    whose gains already absorb the symbol energy).
    """

    kind: str
    order: int
    n_t: int
    n_r: int
    P: np.ndarray
    taus: tuple[float, ...]
    eta: float | None
    pair_meta: tuple[PairMeta, ...]
    energy_scale: float

    @property
    def n_min(self) -> int:
        return self.P.shape[1]


def power_control(deltas, rhos) -> tuple[np.ndarray, float]:
    """Per-pair power factors equalizing rho^2 delta, and the equalized constant.

    Returns (taus, eta) with tau_i^2 rho_i^2 delta_i = eta^2 for every pair
    and 2 sum(tau_i^2) equal to the number of virtual subchannels.

    Raises
    ------
    DegenerateChannelError
        If any delta or rho is zero (zero singular value).
    """
    inv = []
    for d, r in zip(deltas, rhos):
        if d <= 0.0 or r <= 0.0:
            raise DegenerateChannelError("zero pair distance; channel is degenerate")
        inv.append(1.0 / (r * r * d))
    half = len(inv)
    total = sum(inv)
    eta = math.sqrt(half / total)
    taus = np.array([math.sqrt(half * v / total) for v in inv])
    return taus, eta


def _cross_positions(n_min: int, i: int) -> tuple[int, int]:
    # 0-based row/column indices of pair i (1-based) in the cross layout
    return i - 1, n_min - i


def assemble(decomp: ChannelDecomposition, kind: str, order: int,
             profile: PrecoderProfile | None = None,
             x_lookup: XLookup | None = None,
             rotation: LatticeGenerator | None = None) -> AssembledPrecoder:
    """Build the full precoding matrix for one channel realization.

    Parameters
    ----------
    decomp : ChannelDecomposition
    kind : str
        One of PRECODER_KINDS.
    order : int
        QAM order (codebook size for kind "y").
    profile : PrecoderProfile
        Required for kind "proposed".
    x_lookup : XLookup
        Required for kind "x" with order > 4.
    rotation : LatticeGenerator
        Required for kind "lattice" (must match n_min).

    Raises
    ------
    UnsupportedCombinationError
        Odd n_min, unknown kind, or missing kind-specific inputs.
    DegenerateChannelError
        A zero singular value.
    """
    if kind not in PRECODER_KINDS:
        raise UnsupportedCombinationError(f"unknown precoder kind {kind!r}")
    n_t, n_r, n_min = decomp.n_t, decomp.n_r, decomp.n_min
    if decomp.sigmas[-1] <= 0.0:
        raise DegenerateChannelError("channel has a zero singular value")
    energy = make_qam(order).avg_energy
    pairs = subchannel_pairs(decomp)  # also rejects odd n_min
    P = np.zeros((n_t, n_min), dtype=complex)
    scale = math.sqrt(n_t / n_min)

    if kind == "lattice":
        if rotation is None or rotation.dim != n_min:
            raise UnsupportedCombinationError(
                f"lattice assembly needs a {n_min}-dimensional rotation"
            )
        P[:n_min, :] = scale * rotation.G
        meta = tuple(
            PairMeta(index=p.index, gamma=p.gamma, rho=p.rho, theta=0.0, psi=0.0,
                     delta=float("nan"), tau=1.0)
            for p in pairs
        )
        return AssembledPrecoder(kind=kind, order=order, n_t=n_t, n_r=n_r, P=P,
                                 taus=(1.0,) * (n_min // 2), eta=None,
                                 pair_meta=meta, energy_scale=1.0 / math.sqrt(energy))

    if kind == "y":
        meta = []
        for p in pairs:
            r, c = _cross_positions(n_min, p.index)
            strong = decomp.sigmas[r]
            weak = decomp.sigmas[c]
            a, b, _ = y_effective(strong, weak, order, n_t, n_r)
            P[r, r] = a
            P[c, c] = b
            meta.append(
                PairMeta(index=p.index, gamma=p.gamma, rho=p.rho, theta=0.0, psi=0.0,
                         delta=y_delta(p.gamma, order, n_t, n_r, n_min), tau=1.0,
                         y_gains=(a, b))
            )
        return AssembledPrecoder(kind=kind, order=order, n_t=n_t, n_r=n_r, P=P,
                                 taus=(1.0,) * (n_min // 2), eta=None,
                                 pair_meta=tuple(meta), energy_scale=1.0)

    # cross-structured kinds: proposed, edmin, x
    blocks = []
    metas = []
    if kind == "proposed":
        if profile is None or profile.order != order:
            raise UnsupportedCombinationError("proposed assembly needs a matching profile")
        evals = [eval_profile(profile, p.gamma) for p in pairs]
        taus, eta = power_control([e[2] for e in evals], [p.rho for p in pairs])
        for p, (theta, psi, delta), tau in zip(pairs, evals, taus):
            entries = math.sqrt(2.0) * np.array(
                [
                    [math.cos(psi) * math.cos(theta), -math.cos(psi) * math.sin(theta)],
                    [math.sin(psi) * math.sin(theta), math.sin(psi) * math.cos(theta)],
                ],
                dtype=complex,
            )
            blocks.append(tau * scale * entries)
            metas.append(
                PairMeta(index=p.index, gamma=p.gamma, rho=p.rho, theta=theta, psi=psi,
                         delta=delta, tau=float(tau),
                         segment=profile.locate(p.gamma).index)
            )
    elif kind == "edmin":
        gammas = [p.gamma for p in pairs]
        rhos = [p.rho for p in pairs]
        taus, eta = power_control([edmin_delta(g) for g in gammas], rhos)
        for p in pairs:
            pm = edmin_pair(p.gamma, rhos, gammas, p.index, n_min, order)
            blocks.append(pm.tau * scale * pm.entries)
            metas.append(
                PairMeta(index=p.index, gamma=p.gamma, rho=p.rho, theta=0.0, psi=0.0,
                         delta=edmin_delta(p.gamma), tau=pm.tau)
            )
    elif kind == "x":
        taus, eta = np.ones(n_min // 2), None
        for p in pairs:
            pm = x_pair(p.gamma, order, x_lookup)
            theta = math.atan2(float(pm.entries[1, 0].real), float(pm.entries[0, 0].real))
            blocks.append(pm.tau * scale * pm.entries)
            metas.append(
                PairMeta(index=p.index, gamma=p.gamma, rho=p.rho, theta=theta,
                         psi=math.pi / 4.0, delta=x_delta(p.gamma, order, theta),
                         tau=1.0)
            )
    else:  # pragma: no cover
        raise UnsupportedCombinationError(kind)

    for p, block in zip(pairs, blocks):
        r, c = _cross_positions(n_min, p.index)
        P[r, r] = block[0, 0]
        P[r, c] = block[0, 1]
        P[c, r] = block[1, 0]
        P[c, c] = block[1, 1]
    return AssembledPrecoder(kind=kind, order=order, n_t=n_t, n_r=n_r, P=P,
                             taus=tuple(float(t) for t in taus),
                             eta=None if eta is None else float(eta),
                             pair_meta=tuple(metas),
                             energy_scale=1.0 / math.sqrt(energy))


def union_bound(eta: float, order: int, n_min: int, snr_linear: float) -> float:
    """(M^n_min - 1) Q(sqrt(SNR eta^2 / (n_min E))) clamped to [0, 1].

    eta is taken at face value.  The equalized constant from power_control
    follows the half-difference convention, under which the strict union
    bound on the word error probability is union_bound(2 * eta, ...); passing
    eta unscaled gives the same expression shifted 6 dB, still an upper bound.
    """
    energy = make_qam(order).avg_energy
    arg = math.sqrt(snr_linear * eta * eta / (n_min * energy))
    q = float(ndtr(-arg))
    return min(1.0, (order ** n_min - 1) * q)


def pair_delta_curve(order: int, kind: str, gammas, profile: PrecoderProfile | None = None,
                     x_lookup: XLookup | None = None,
                     rotation: LatticeGenerator | None = None) -> np.ndarray:
    """Worst-case squared pair distance versus gamma, power-matched across kinds.

    All curves are expressed in the half-difference convention of the
    proposed profile (for a 2x2 system with both schemes spending the same
    transmit power), so they are directly comparable.
    """
    from .optimizer import profile_delta  # local to avoid an import cycle at module load

    gammas = np.asarray(gammas, dtype=float)
    if kind == "proposed":
        if profile is None or profile.order != order:
            raise UnsupportedCombinationError("proposed curve needs a matching profile")
        return profile_delta(profile, gammas)
    if kind == "edmin":
        if order != 4:
            raise UnsupportedCombinationError("the complex pair optimizer exists only for 4-QAM")
        return np.array([edmin_delta(g) / 2.0 for g in gammas])
    if kind == "x":
        out = np.empty_like(gammas)
        for i, g in enumerate(gammas):
            pm = x_pair(g, order, x_lookup)
            theta = math.atan2(float(pm.entries[1, 0].real), float(pm.entries[0, 0].real))
            out[i] = x_delta(g, order, theta)
        return out
    if kind == "y":
        return np.array([y_delta(g, order, 2, 2, 2) for g in gammas])
    if kind == "lattice":
        if rotation is None or rotation.dim != 2:
            raise UnsupportedCombinationError("the pair curve needs the 2D rotation")
        from .optimizer import _reduced_pairs

        pairs = _reduced_pairs(order).astype(float)
        out = np.empty_like(gammas)
        for i, g in enumerate(gammas):
            shaped = np.diag([math.cos(g), math.sin(g)]) @ rotation.G @ pairs.T
            out[i] = 0.5 * (shaped**2).sum(axis=0).min()
        return out
    raise UnsupportedCombinationError(f"unknown precoder kind {kind!r}")


def zeta(decomp: ChannelDecomposition, profile: PrecoderProfile, order: int) -> float:
    """Equalized constant over the best pair's unequalized distance.

    Exactly 1 for a single pair; below 1 whenever equalization costs the best
    pair some of its margin.
    """
    assembled = assemble(decomp, "proposed", order, profile=profile)
    if assembled.n_min == 2:
        return 1.0
    best = assembled.pair_meta[0]
    return assembled.eta / (best.rho * math.sqrt(best.delta))
