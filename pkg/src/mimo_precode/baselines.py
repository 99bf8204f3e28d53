"""Rival pair precoders: the complex-valued pair optimizer for 4-QAM, the
rotation-only precoder, the displaced-diagonal precoder with its 2D codebook,
and orthogonal full-diversity lattice rotations.

Pair blocks are stored unscaled with squared Frobenius norm 2; the per-pair
power factor tau and the sqrt(n_t / n_min) system scaling are applied at
assembly time.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constellation import _sqrt_order
from .errors import LatticeDataError, UnsupportedCombinationError, UnsupportedModulationError
from .optimizer import SearchGrid, _reduced_pairs, _rotation_tables, pair_distance_sq

__all__ = [
    "PairMatrix",
    "LatticeGenerator",
    "XLookup",
    "edmin_threshold_angle",
    "edmin_delta",
    "edmin_pair",
    "x_rotation_angle",
    "x_pair",
    "build_x_lookup",
    "save_x_lookup",
    "load_x_lookup",
    "y_codebook",
    "y_effective",
    "lattice_precoder",
    "data_dir",
]

DATA_ENV_VAR = "MIMO_PRECODE_DATA"


@dataclass(frozen=True)
class PairMatrix:
    """One 2x2 pair block.

    entries have squared Frobenius norm 2; the assembled block is
    tau * sqrt(n_t / n_min) * entries.
    """

    entries: np.ndarray
    tau: float
    kind: str


@dataclass(frozen=True)
class LatticeGenerator:
    """A real orthogonal rotation with nonzero product distance on Z^dim."""

    dim: int
    G: np.ndarray
    source: str


# ---------------------------------------------------------------------------
# Complex-valued pair optimizer (4-QAM only)
# ---------------------------------------------------------------------------


def edmin_threshold_angle() -> float:
    """Channel angle at which the 4-QAM pair optimizer switches branches."""
    num = 3.0 * math.sqrt(3.0) - 2.0 * math.sqrt(6.0) + 2.0 * math.sqrt(2.0) - 3.0
    den = 3.0 * math.sqrt(3.0) - 2.0 * math.sqrt(6.0) + 1.0
    return math.atan(math.sqrt(num / den))


def edmin_delta(gamma: float) -> float:
    """Worst-case squared distance constant of the 4-QAM pair optimizer.

    Below the branch threshold the pair transmits on the strong subchannel
    only; above it both subchannels are loaded.
    """
    if gamma < edmin_threshold_angle():
        return (1.0 - 1.0 / math.sqrt(3.0)) * math.cos(gamma) ** 2
    cos2, sin2 = math.cos(gamma) ** 2, math.sin(gamma) ** 2
    return (4.0 - 2.0 * math.sqrt(2.0)) * cos2 * sin2 / (1.0 + (2.0 - 2.0 * math.sqrt(2.0)) * cos2)


def edmin_pair(gamma_i: float, rhos, gammas, i: int, n_min: int, order: int = 4) -> PairMatrix:
    """Pair block and power factor of the complex-valued 4-QAM optimizer.

    Parameters
    ----------
    gamma_i, rhos, gammas : float, sequences
        Angle of this pair and the (rho, gamma) lists of all pairs; the
        power factor equalizes rho^2 delta across pairs.
    i : int
        1-based pair index into rhos/gammas.
    n_min : int
        Number of virtual subchannels.

    Raises
    ------
    UnsupportedModulationError
        For any order other than 4 (this precoder exists for 4-QAM only).
    """
    if order != 4:
        raise UnsupportedModulationError("the complex pair optimizer exists only for 4-QAM")
    inv = [1.0 / (r * r * edmin_delta(g)) for r, g in zip(rhos, gammas)]
    tau = math.sqrt(n_min / 2.0 * inv[i - 1] / sum(inv))
    if gamma_i < edmin_threshold_angle():
        row = [math.sqrt((3.0 + math.sqrt(3.0)) / 6.0),
               math.sqrt((3.0 - math.sqrt(3.0)) / 6.0) * np.exp(1j * math.pi / 12.0)]
        entries = math.sqrt(2.0) * np.array([row, [0.0, 0.0]], dtype=complex)
    else:
        # the power split equalizes the two binding difference classes of the
        # octagonal block, which happens at tan(gamma) tan(psi) = sqrt(2) - 1;
        # this is also the unique split consistent with the branch's distance
        # constant delta(gamma) used for power control
        psi = math.atan((math.sqrt(2.0) - 1.0) / math.tan(gamma_i))
        entries = np.diag([math.cos(psi), math.sin(psi)]).astype(complex) @ np.array(
            [[1.0, np.exp(1j * math.pi / 4.0)], [-1.0, np.exp(1j * math.pi / 4.0)]]
        )
    return PairMatrix(entries=entries, tau=tau, kind="edmin")


# ---------------------------------------------------------------------------
# Rotation-only pair precoder
# ---------------------------------------------------------------------------


def x_rotation_angle(gamma: float) -> float:
    """Closed-form 4-QAM rotation angle, clamped into (0, pi/4].

    The printed arctan expression is real only while its radicand
    1 + tan^4(g) - 3 tan^2(g) is nonnegative, and exceeds pi/4 once
    tan^2(g) > 1/3; both regions are clamped to pi/4, the continuous limit of
    the large-angle branch.
    """
    if gamma >= math.pi / 3.0:
        return math.pi / 4.0
    t2 = math.tan(gamma) ** 2
    radicand = 1.0 + t2 * t2 - 3.0 * t2
    if radicand < 0.0:
        return math.pi / 4.0
    theta = math.atan((1.0 - t2 - math.sqrt(radicand)) / t2) if t2 > 0 else math.atan(0.5)
    return min(theta, math.pi / 4.0)


@dataclass(frozen=True)
class XLookup:
    """Per-gamma rotation angles found by numerical search, O(1) retrieval."""

    order: int
    gamma_step: float
    thetas: np.ndarray

    def theta_for(self, gamma: float) -> float:
        idx = int(round(gamma / self.gamma_step)) - 1
        idx = min(max(idx, 0), len(self.thetas) - 1)
        return float(self.thetas[idx])


def build_x_lookup(order: int, gamma_step: float = 0.001) -> XLookup:
    """Best rotation angle per gamma under an equal power split.

    For gamma = k * gamma_step the angle maximizes the minimum shaped distance
    with the power-split angle fixed at pi/4, leaving the rotation as the only
    free parameter.
    """
    _sqrt_order(order)
    grid = SearchGrid(gamma_step)
    gammas = grid.theta_values()  # same lattice {k step} over (0, pi/4]
    thetas = grid.theta_values()
    u, v = _rotation_tables(order, gamma_step)
    w_strong = 0.5 * np.cos(gammas) ** 2
    w_weak = 0.5 * np.sin(gammas) ** 2
    acc = np.full((len(gammas), len(thetas)), np.inf)
    tmp = np.empty_like(acc)
    tmp2 = np.empty_like(acc)
    for k in range(u.shape[0]):
        np.multiply(w_strong[:, None], u[k], out=tmp)
        np.multiply(w_weak[:, None], v[k], out=tmp2)
        tmp += tmp2
        np.minimum(acc, tmp, out=acc)
    best = thetas[np.argmax(acc, axis=1)]
    return XLookup(order=order, gamma_step=gamma_step, thetas=best)


def save_x_lookup(lookup: XLookup, path) -> None:
    doc = {"order": lookup.order, "gamma_step": lookup.gamma_step,
           "thetas": [float(t) for t in lookup.thetas]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_x_lookup(path) -> XLookup:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return XLookup(order=int(doc["order"]), gamma_step=float(doc["gamma_step"]),
                   thetas=np.array(doc["thetas"], dtype=float))


def x_pair(gamma_i: float, order: int, lookup: XLookup | None = None) -> PairMatrix:
    """Rotation pair block: closed form for 4-QAM, table lookup otherwise.

    Raises
    ------
    UnsupportedCombinationError
        For order > 4 without a prebuilt lookup table.
    """
    if order == 4:
        theta = x_rotation_angle(gamma_i)
    else:
        if lookup is None or lookup.order != order:
            raise UnsupportedCombinationError(
                f"{order}-QAM rotation angles require a prebuilt lookup table"
            )
        theta = lookup.theta_for(gamma_i)
    entries = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]],
        dtype=complex,
    )
    return PairMatrix(entries=entries, tau=1.0, kind="x")


def x_delta(gamma: float, order: int, theta: float) -> float:
    """Worst-case squared half-difference distance of the rotation block."""
    pairs = _reduced_pairs(order)
    eps = pair_distance_sq(pairs[:, 0], pairs[:, 1], theta, math.pi / 4.0, gamma)
    return float(eps.min())


# ---------------------------------------------------------------------------
# Displaced-diagonal pair precoder with a 2D codebook
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def y_codebook(order: int) -> np.ndarray:
    """The order-M two-dimensional codebook: columns (2l - M - 1, (-1)^l)."""
    ls = np.arange(1, order + 1, dtype=np.int64)
    out = np.stack([2 * ls - order - 1, (-1) ** ls], axis=1)
    out.setflags(write=False)
    return out


def y_effective(sigma_i: float, sigma_partner: float, order: int,
                n_t: int, n_r: int) -> tuple[float, float, np.ndarray]:
    """Effective diagonal gains (a, b) of one pair, plus the 2D codebook.

    The strong subchannel carries the wide coordinate with gain a; the weak
    one carries the sign coordinate with gain b, which drops to zero for
    well-conditioned pairs.
    """
    if not sigma_i >= sigma_partner > 0:
        raise ValueError("singular values must satisfy sigma_i >= sigma_partner > 0")
    beta_sq = (sigma_i / sigma_partner) ** 2
    m_sq = order * order - 1.0
    if beta_sq >= m_sq / 3.0:
        a = math.sqrt(3.0 * n_t / (n_r * m_sq))
        b = 0.0
    else:
        shift = m_sq / 9.0
        a = math.sqrt(n_t / (3.0 * n_r * (beta_sq + shift)))
        b = math.sqrt(beta_sq * n_t / (n_r * (beta_sq + shift)))
    return a, b, y_codebook(order)


def y_delta(gamma: float, order: int, n_t: int, n_r: int, n_min: int) -> float:
    """Worst-case squared distance of the diagonal pair scheme, expressed in
    the same half-difference convention as the proposed profile."""
    sig_strong, sig_weak = math.cos(gamma), math.sin(gamma)
    a, b, codebook = y_effective(sig_strong, sig_weak, order, n_t, n_r)
    diffs = codebook[:, None, :] - codebook[None, :, :]
    diffs = diffs.reshape(-1, 2)
    diffs = diffs[np.any(diffs != 0, axis=1)]
    dist = (a * sig_strong * diffs[:, 0]) ** 2 + (b * sig_weak * diffs[:, 1]) ** 2
    energy = 2.0 * (order - 1) / 3.0
    return float(dist.min()) * n_min * energy / (8.0 * n_t)


# ---------------------------------------------------------------------------
# Lattice rotations
# ---------------------------------------------------------------------------


def data_dir() -> str:
    """Directory holding rotation matrix files; MIMO_PRECODE_DATA overrides."""
    override = os.environ.get(DATA_ENV_VAR)
    if override:
        return override
    return os.path.join(os.path.dirname(__file__), "data")


def _validate_rotation(dim: int, G: np.ndarray) -> None:
    if G.shape != (dim, dim):
        raise LatticeDataError(f"rotation must be {dim}x{dim}, got {G.shape}")
    if np.abs(G @ G.T - np.eye(dim)).max() > 1e-10:
        raise LatticeDataError("rotation is not orthogonal to 1e-10")
    radius = 2 if dim <= 4 else 1
    axes = [np.arange(-radius, radius + 1)] * dim
    vecs = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    vecs = vecs[np.any(vecs != 0, axis=1)]
    prods = np.abs(np.prod(vecs @ G.T, axis=1))
    if prods.min() <= 0.0:
        raise LatticeDataError("rotation has a zero product distance on test vectors")


def lattice_precoder(n_min: int, store: str | None = None) -> LatticeGenerator:
    """Full-diversity orthogonal rotation for n_min real dimensions.

    Dimension 2 is built in (the planar rotation by arctan(2)/2, the largest
    product distance among 2x2 orthogonal matrices); dimensions 4 and 8 load
    a JSON generator file from the data directory and validate it.

    Raises
    ------
    LatticeDataError
        If the generator file is missing or fails validation.
    UnsupportedCombinationError
        For dimensions without a bundled construction.
    """
    if n_min == 2:
        ang = 0.5 * math.atan(2.0)
        G = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
        return LatticeGenerator(dim=2, G=G, source="planar rotation by arctan(2)/2")
    if n_min not in (4, 8):
        raise UnsupportedCombinationError(f"no rotation construction for dimension {n_min}")
    path = os.path.join(store or data_dir(), f"rotation_{n_min}.json")
    if not os.path.exists(path):
        raise LatticeDataError(f"rotation file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    G = np.array(doc["rows"], dtype=float)
    _validate_rotation(n_min, G)
    return LatticeGenerator(dim=n_min, G=G, source=str(doc.get("source", path)))
