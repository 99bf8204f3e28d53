"""Square QAM alphabets, their difference sets, and superposition maps.

Points are kept as exact small integers (complex values with integer real and
imaginary parts).  All floating-point energy scaling happens at transmit-side
assembly, which keeps set-equality checks on constellations exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedModulationError

__all__ = [
    "QamConstellation",
    "make_qam",
    "difference_pairs",
    "compose_superposed",
    "decompose_superposed",
]


def _sqrt_order(order: int) -> int:
    """Return sqrt(order) for order = 4**a, else raise."""
    if not isinstance(order, (int, np.integer)) or order < 4:
        raise UnsupportedModulationError(f"order must be a power of 4, got {order!r}")
    root = math.isqrt(int(order))
    if root * root != order or (root & (root - 1)) != 0:
        raise UnsupportedModulationError(f"order must be a power of 4, got {order}")
    return root


@dataclass(frozen=True)
class QamConstellation:
    """An unnormalized square QAM alphabet.

    Attributes
    ----------
    order : int
        Number of points M (a power of 4).
    pam_levels : np.ndarray
        The sqrt(M) odd-integer amplitude levels, ascending.
    points : np.ndarray
        All M complex points, real part varying slowest.
    avg_energy : float
        Mean of |point|^2, equal to 2(M - 1)/3.
    """

    order: int
    pam_levels: np.ndarray
    points: np.ndarray
    avg_energy: float

    def __post_init__(self):
        self.pam_levels.setflags(write=False)
        self.points.setflags(write=False)


@lru_cache(maxsize=None)
def make_qam(order: int) -> QamConstellation:
    """Build the standard square QAM constellation of the given order.

    Parameters
    ----------
    order : int
        Constellation size M; must be 4**a for some integer a >= 1.

    Returns
    -------
    QamConstellation

    Raises
    ------
    UnsupportedModulationError
        If order is not a power of 4.
    """
    root = _sqrt_order(order)
    levels = np.arange(1, root + 1, dtype=np.int64) * 2 - root - 1
    re, im = np.meshgrid(levels, levels, indexing="ij")
    points = (re + 1j * im).ravel()
    return QamConstellation(
        order=int(order),
        pam_levels=levels,
        points=points,
        avg_energy=2.0 * (order - 1) / 3.0,
    )


def difference_pairs(order: int) -> list[tuple[int, int]]:
    """All half-difference pairs (p, q) of two PAM coordinates, except (0, 0).

    p and q each range over {-(sqrt(M)-1), ..., sqrt(M)-1}; the factor-2
    scaling to an actual coordinate difference is the caller's business.
    """
    root = _sqrt_order(order)
    rng = range(-root + 1, root)
    return [(p, q) for p in rng for q in rng if (p, q) != (0, 0)]


def compose_superposed(x1: complex, x2: complex, order: int) -> complex:
    """Superpose two order-M QAM points into one point of the M^2-QAM grid.

    Returns sqrt(M) * x1 + x2.  Over all (x1, x2) pairs the image is exactly
    the M^2-QAM constellation.
    """
    root = _sqrt_order(order)
    return root * x1 + x2


def _split_axis(value: int, root: int) -> tuple[int, int]:
    # sign/ceil map for one real coordinate, then the residual level
    sign = 1 if value >= 0 else -1
    coarse = sign * (2 * math.ceil(abs(value) / (2 * root)) - 1)
    return coarse, value - root * coarse


def decompose_superposed(xp: complex, order: int) -> tuple[complex, complex]:
    """Invert compose_superposed on the odd-integer lattice.

    The real and imaginary parts are processed independently with the
    sign/ceil map and the residual subtraction.  Input coordinates must be
    odd integers; points of the M^2-QAM grid map back to order-M QAM pairs
    (coordinates outside that grid map outside order-M QAM accordingly).

    Raises
    ------
    UnsupportedModulationError
        If order is not a power of 4.
    ValueError
        If xp does not have odd-integer coordinates.
    """
    root = _sqrt_order(order)
    re, im = complex(xp).real, complex(xp).imag
    re_i, im_i = int(round(re)), int(round(im))
    if re_i != re or im_i != im or re_i % 2 == 0 or im_i % 2 == 0:
        raise ValueError(f"{xp!r} is not on the odd-integer QAM lattice")
    re1, re2 = _split_axis(re_i, root)
    im1, im2 = _split_axis(im_i, root)
    return complex(re1, im1), complex(re2, im2)
