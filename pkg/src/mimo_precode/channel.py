"""Rayleigh MIMO channel sampling and the SVD-derived per-pair quantities.

Random sampling is organized around splittable substreams: every Monte Carlo
trial derives its own generator from (master seed, trial index), so results
never depend on how trials are partitioned across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, UnsupportedCombinationError

__all__ = [
    "ChannelRealization",
    "ChannelDecomposition",
    "SubchannelPair",
    "trial_rng",
    "sample_rayleigh",
    "decompose",
    "subchannel_pairs",
]


def trial_rng(seed: int, *indices: int) -> np.random.Generator:
    """Deterministic substream for one trial, independent of worker layout."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=(seed, *indices))))


@dataclass(frozen=True)
class ChannelRealization:
    """One flat-fading channel draw: H is n_r x n_t complex gains."""

    n_r: int
    n_t: int
    H: np.ndarray


@dataclass(frozen=True)
class ChannelDecomposition:
    """SVD of a channel: H = U diag(sigmas) V^H with sigmas descending."""

    U: np.ndarray
    V: np.ndarray
    sigmas: np.ndarray

    @property
    def n_r(self) -> int:
        return self.U.shape[0]

    @property
    def n_t(self) -> int:
        return self.V.shape[0]

    @property
    def n_min(self) -> int:
        return len(self.sigmas)


@dataclass(frozen=True)
class SubchannelPair:
    """Coupling of the i-th strongest and i-th weakest virtual subchannels.

    gamma is arctan of the weak/strong singular-value ratio, in (0, pi/4]
    for nondegenerate channels; rho is the root sum square of the pair.
    """

    index: int
    gamma: float
    rho: float


def sample_rayleigh(n_r: int, n_t: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw an n_r x n_t channel with i.i.d. unit-variance complex Gaussian entries.

    Each entry has variance 0.5 per real dimension.  Pass a substream from
    trial_rng for reproducible parallel simulation.
    """
    if n_r < 1 or n_t < 1:
        raise ValueError("antenna counts must be positive")
    gauss = rng.standard_normal((n_r, n_t, 2))
    H = math.sqrt(0.5) * (gauss[..., 0] + 1j * gauss[..., 1])
    return ChannelRealization(n_r=n_r, n_t=n_t, H=H)


def decompose(channel: ChannelRealization | np.ndarray) -> ChannelDecomposition:
    """Singular value decomposition of a channel matrix.

    Returns unitary U (n_r x n_r), unitary V (n_t x n_t) and the n_min
    singular values in descending order.  Singular-vector phases follow the
    LAPACK convention and are not normalized further; downstream processing
    works in the rotated frame, so the convention cancels.

    Raises
    ------
    NumericalError
        If the SVD iteration fails to converge (not expected for finite
        Gaussian inputs).
    """
    H = channel.H if isinstance(channel, ChannelRealization) else np.asarray(channel)
    if not np.all(np.isfinite(H)):
        raise ValueError("channel matrix must be finite")
    try:
        U, s, Vh = np.linalg.svd(H, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return ChannelDecomposition(U=U, V=Vh.conj().T, sigmas=s)


def subchannel_pairs(decomp: ChannelDecomposition) -> list[SubchannelPair]:
    """Pair subchannel i with subchannel n_min - i + 1, strongest with weakest.

    The resulting gamma sequence is non-decreasing.  Channels with an odd
    number of virtual subchannels are rejected (the middle subchannel has no
    partner in this scheme).
    """
    n_min = decomp.n_min
    if n_min % 2 != 0:
        raise UnsupportedCombinationError(
            f"pairing requires an even number of virtual subchannels, got {n_min}"
        )
    sig = decomp.sigmas
    pairs = []
    for i in range(n_min // 2):
        strong, weak = sig[i], sig[n_min - 1 - i]
        gamma = math.atan2(weak, strong)
        rho = math.hypot(strong, weak)
        pairs.append(SubchannelPair(index=i + 1, gamma=gamma, rho=rho))
    return pairs
