"""Two-angle optimization of the per-pair precoder.

For one subchannel pair the precoder is parameterized by a power-split angle
psi and a rotation angle theta.  The figure of merit is the worst-case squared
received distance over all nonzero symbol differences, and the maximizing
angles turn out to be piecewise constant in the channel angle gamma: theta is
a step function, and tan(gamma)^2 tan(psi)^2 is a constant A on each step.
This module provides

* the brute-force grid search over (psi, theta),
* closed-form solvers for the per-segment constants and segment boundaries,
* a two-phase profile builder (coarse numerical scan, then exact refinement),
* profile evaluation and lossless JSON serialization.

All distances here are on HALF coordinate differences (p, q); the factor 4 to
full differences is constant and cancels in every argmax and power ratio.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .constellation import _sqrt_order, difference_pairs
from .errors import NumericalError

__all__ = [
    "SearchGrid",
    "GridSearchResult",
    "PrecoderSegment",
    "PrecoderProfile",
    "shaping_matrix",
    "pair_distance_sq",
    "grid_search",
    "solve_rotation_angle",
    "solve_pair_weight",
    "solve_segment_boundary",
    "build_profile",
    "eval_profile",
    "profile_delta",
    "save_profile",
    "load_profile",
]

_QUARTER_PI = math.pi / 4.0
_HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class SearchGrid:
    """Uniform angle grid {k * delta_inc} over psi in (0, pi/2] and theta in (0, pi/4]."""

    delta_inc: float = 0.001

    def __post_init__(self):
        if self.delta_inc <= 0:
            raise ValueError("delta_inc must be positive")

    def psi_values(self) -> np.ndarray:
        n = int(math.floor(_HALF_PI / self.delta_inc))
        return self.delta_inc * np.arange(1, n + 1)

    def theta_values(self) -> np.ndarray:
        n = int(math.floor(_QUARTER_PI / self.delta_inc))
        return self.delta_inc * np.arange(1, n + 1)


@dataclass(frozen=True)
class GridSearchResult:
    psi: float
    theta: float
    delta: float
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PrecoderSegment:
    """One gamma interval on which the optimal angles have a fixed closed form.

    theta_star is the constant rotation angle; weight is the constant value of
    tan(gamma)^2 tan(psi)^2 (zero exactly on the first segment, where the weak
    subchannel of the pair is unused); pairs are the half-difference pairs
    whose distances tie at the optimum (2 on the first segment, 3 afterwards).
    """

    index: int
    gamma_lo: float
    gamma_hi: float
    theta_star: float
    weight: float
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PrecoderProfile:
    """Piecewise description of the optimal pair precoder for one QAM order."""

    order: int
    segments: tuple[PrecoderSegment, ...]

    @cached_property
    def boundaries(self) -> np.ndarray:
        """Interior segment boundaries (gamma at which theta_star switches)."""
        out = np.array([seg.gamma_lo for seg in self.segments[1:]])
        out.setflags(write=False)
        return out

    @cached_property
    def _bounds_list(self) -> tuple[float, ...]:
        return tuple(seg.gamma_lo for seg in self.segments[1:])

    def locate(self, gamma: float) -> PrecoderSegment:
        """Segment containing gamma; a boundary belongs to the higher segment."""
        if not 0.0 < gamma <= _QUARTER_PI + 1e-12:
            raise ValueError(f"gamma must lie in (0, pi/4], got {gamma}")
        return self.segments[bisect.bisect_right(self._bounds_list, gamma)]


def shaping_matrix(gamma: float, psi: float, theta: float) -> np.ndarray:
    """The 2x2 real matrix diag(cos g, sin g) diag(cos p, sin p) R(theta).

    R(theta) is the planar rotation with -sin(theta) in the upper-right entry.
    Its squared Frobenius norm is cos^2(g)cos^2(p) + sin^2(g)sin^2(p).
    """
    rot = np.array(
        [
            [math.cos(theta), -math.sin(theta)],
            [math.sin(theta), math.cos(theta)],
        ]
    )
    return np.diag([math.cos(gamma), math.sin(gamma)]) @ np.diag([math.cos(psi), math.sin(psi)]) @ rot


def pair_distance_sq(p, q, theta, psi, gamma):
    """Squared norm of shaping_matrix(gamma, psi, theta) applied to (p, q).

    Accepts scalars or broadcastable arrays.  Equals
    cos^2(g)cos^2(psi)(p cos t - q sin t)^2 + sin^2(g)sin^2(psi)(q cos t + p sin t)^2.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    a = (np.cos(gamma) * np.cos(psi)) ** 2
    b = (np.sin(gamma) * np.sin(psi)) ** 2
    return a * (p * ct - q * st) ** 2 + b * (q * ct + p * st) ** 2


def _canonical_pair(p: int, q: int) -> tuple[int, int]:
    """Representative of the {(p, q), (-p, -q)} orbit with p > 0, or p == 0, q > 0."""
    if p < 0 or (p == 0 and q < 0):
        return (-p, -q)
    return (p, q)


@lru_cache(maxsize=None)
def _reduced_pairs(order: int) -> np.ndarray:
    """Half-difference pairs with the sign orbit quotiented out (min unchanged)."""
    reps = sorted({_canonical_pair(p, q) for p, q in difference_pairs(order)})
    out = np.array(reps, dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=8)
def _rotation_tables(order: int, delta_inc: float) -> tuple[np.ndarray, np.ndarray]:
    """Squared rotated components of every reduced pair over the theta grid."""
    thetas = SearchGrid(delta_inc).theta_values()
    pairs = _reduced_pairs(order)
    ct, st = np.cos(thetas), np.sin(thetas)
    p = pairs[:, 0:1].astype(float)
    q = pairs[:, 1:2].astype(float)
    u = (p * ct - q * st) ** 2  # (n_pairs, n_theta)
    v = (q * ct + p * st) ** 2
    u.setflags(write=False)
    v.setflags(write=False)
    return u, v


def _min_distance_profile(u: np.ndarray, v: np.ndarray, w_strong: np.ndarray,
                          w_weak: np.ndarray):
    """Min over pairs of the shaped distance on a (psi-grid x theta-grid) lattice.

    u, v are the per-pair rotated component tables; w_strong/w_weak are the
    per-psi weights cos^2(g)cos^2(psi), sin^2(g)sin^2(psi).  Returns
    (best_value, psi_index, theta_index).  Runs as a per-pair running minimum
    so the working set stays one (psi x theta) plane.
    """
    n_psi, n_theta = len(w_strong), u.shape[1]
    acc = np.full((n_psi, n_theta), np.inf)
    tmp = np.empty_like(acc)
    tmp2 = np.empty_like(acc)
    ws = w_strong[:, None]
    ww = w_weak[:, None]
    for i in range(u.shape[0]):
        np.multiply(ws, u[i], out=tmp)
        np.multiply(ww, v[i], out=tmp2)
        tmp += tmp2
        np.minimum(acc, tmp, out=acc)
    best = float(acc.flat[int(np.argmax(acc))])
    # the maximum can be a plateau (degenerate optima); take its first grid
    # point so ties resolve deterministically toward the smallest psi, theta
    flat = int(np.argmax(acc >= best * (1.0 - 1e-12)))
    return best, flat // n_theta, flat % n_theta


def grid_search(gamma: float, order: int, grid: SearchGrid | None = None,
                active_tol: float | None = None) -> GridSearchResult:
    """Exhaustive max-min search for the best (psi, theta) on the grid.

    Parameters
    ----------
    gamma : float
        Channel angle in (0, pi/4].
    order : int
        QAM order.
    grid : SearchGrid, optional
        Angle grid; 0.001 rad increments by default.
    active_tol : float, optional
        Relative tolerance for reporting the pairs that attain the minimum at
        the grid optimum.  Defaults to max(1e-6, 8 * delta_inc): on a finite
        grid the truly tied pairs separate by O(delta_inc), so the tolerance
        scales with the resolution.

    Returns
    -------
    GridSearchResult
        Grid-optimal psi, theta, the max-min squared distance (half-difference
        convention), and the canonical pairs active at the optimum.
    """
    grid = grid or SearchGrid()
    pairs = _reduced_pairs(order)
    psis = grid.psi_values()
    thetas = grid.theta_values()
    w_strong = (math.cos(gamma) * np.cos(psis)) ** 2
    w_weak = (math.sin(gamma) * np.sin(psis)) ** 2
    u, v = _rotation_tables(order, grid.delta_inc)
    delta, pi_idx, ti_idx = _min_distance_profile(u, v, w_strong, w_weak)
    psi_star = float(psis[pi_idx])
    theta_star = float(thetas[ti_idx])
    tol = active_tol if active_tol is not None else max(1e-6, 8.0 * grid.delta_inc)
    eps = pair_distance_sq(pairs[:, 0], pairs[:, 1], theta_star, psi_star, gamma)
    active = pairs[eps <= delta * (1.0 + tol)]
    return GridSearchResult(
        psi=psi_star,
        theta=theta_star,
        delta=float(delta),
        pairs=tuple(map(tuple, active.tolist())),
    )


def _two_pair_angles(pair1, pair2) -> list[float]:
    """Rotation angles in (0, pi/4] equalizing two shaped distances at psi = 0."""
    p1, q1 = pair1
    p2, q2 = pair2
    roots = []
    for s in (+1, -1):
        den = q1 - s * q2
        if den != 0:
            roots.append((p1 - s * p2) / den)
    return [math.atan(t) for t in roots if 0.0 < t <= math.tan(_QUARTER_PI) + 1e-12]


def solve_rotation_angle(pair1, pair2, pair3, order: int | None = None,
                         gamma_mid: float | None = None) -> float:
    """Rotation angle at which three shaped pair distances can tie.

    Solves the quadratic in tan(theta) obtained by equating the three
    distances.  If both roots land in (0, pi/4], the tie is broken by the
    max-min value at gamma_mid (which requires order), mirroring a check
    against the numerical search.

    Raises
    ------
    NumericalError
        If no root lies in (0, pi/4], or the tie cannot be broken.
    """
    p1, q1 = pair1
    p2, q2 = pair2
    p3, q3 = pair3
    a1 = p1 * p1 + q1 * q1 - p2 * p2 - q2 * q2
    b1 = p2 * q2 - p1 * q1
    c1 = q2 * q2 - q1 * q1
    d1 = p2 * p2 - p1 * p1
    a2 = p1 * p1 + q1 * q1 - p3 * p3 - q3 * q3
    b2 = p3 * q3 - p1 * q1
    c2 = q3 * q3 - q1 * q1
    d2 = p3 * p3 - p1 * p1
    qa = a1 * d2 - a2 * d1
    qb = 2.0 * (a1 * b2 - a2 * b1)
    qc = a1 * c2 - a2 * c1
    if qa == 0 and qb == 0:
        raise NumericalError(f"pairs {pair1}, {pair2}, {pair3} give a degenerate equation")
    if qa == 0:
        roots = [-qc / qb]
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0:
            raise NumericalError(f"no real tie angle for pairs {pair1}, {pair2}, {pair3}")
        sq = math.sqrt(disc)
        roots = [(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)]
    in_range = sorted({t for t in roots if 0.0 < t <= 1.0 + 1e-12})
    if not in_range:
        raise NumericalError(
            f"no tie angle in (0, pi/4] for pairs {pair1}, {pair2}, {pair3}"
        )
    if len(in_range) == 1:
        return math.atan(min(in_range[0], 1.0))
    if order is None or gamma_mid is None:
        raise NumericalError(
            f"two admissible tie angles for pairs {pair1}, {pair2}, {pair3}; "
            "pass order and gamma_mid to disambiguate"
        )
    best_theta, best_val = None, -np.inf
    pairs = _reduced_pairs(order)
    for t in in_range:
        theta = math.atan(min(t, 1.0))
        try:
            weight = solve_pair_weight(pair1, pair2, theta)
        except NumericalError:
            continue
        psi = math.atan(math.sqrt(weight) / math.tan(gamma_mid))
        val = float(np.min(pair_distance_sq(pairs[:, 0], pairs[:, 1], theta, psi, gamma_mid)))
        if val > best_val:
            best_theta, best_val = theta, val
    if best_theta is None:
        raise NumericalError("tie angles could not be ranked")
    return best_theta


def _weight_denominator(pair_a, pair_b, theta: float) -> float:
    pa, qa_ = pair_a
    pb, qb_ = pair_b
    return (
        (pb * qb_ - pa * qa_) * math.sin(2.0 * theta)
        + (qb_ * qb_ - qa_ * qa_) * math.cos(theta) ** 2
        + (pb * pb - pa * pa) * math.sin(theta) ** 2
    )


def solve_pair_weight(pair1, pair2, theta_star: float) -> float:
    """The constant A = tan(gamma)^2 tan(psi)^2 implied by two tied pairs.

    Evaluates 1 + (|pair1|^2 - |pair2|^2) / D where D mixes the rotated
    coordinates of the two pairs at theta_star.

    Raises
    ------
    NumericalError
        If the denominator vanishes (the combination carries no information)
        or the result is negative (wrong pair combination).
    """
    p1, q1 = pair1
    p2, q2 = pair2
    num = p1 * p1 + q1 * q1 - p2 * p2 - q2 * q2
    den = _weight_denominator(pair1, pair2, theta_star)
    if abs(den) < 1e-12:
        if num == 0:
            raise NumericalError(f"pairs {pair1}, {pair2} are degenerate at this angle")
        raise NumericalError(f"pairs {pair1}, {pair2} give an ill-conditioned weight")
    weight = 1.0 + num / den
    if weight < -1e-10:
        raise NumericalError(f"negative weight for pairs {pair1}, {pair2}")
    return max(weight, 0.0)


@lru_cache(maxsize=4096)
def _rotated_components_sq(pair, theta: float) -> tuple[float, float]:
    p, q = pair
    c = (p * math.cos(theta) - q * math.sin(theta)) ** 2
    d = (q * math.cos(theta) + p * math.sin(theta)) ** 2
    return c, d


def segment_delta(theta_star: float, weight: float, pair, gamma) -> float | np.ndarray:
    """Worst-case squared distance on a segment, evaluated at gamma.

    Uses sin^2(g) (c + A d) / (A + tan^2(g)) with (c, d) the squared rotated
    components of any active pair.
    """
    c, d = _rotated_components_sq(pair, theta_star)
    gamma = np.asarray(gamma, dtype=float)
    val = np.sin(gamma) ** 2 * (c + weight * d) / (weight + np.tan(gamma) ** 2)
    return float(val) if val.ndim == 0 else val


def solve_segment_boundary(seg_prev: PrecoderSegment, seg_next: PrecoderSegment) -> float:
    """Gamma at which two consecutive segments achieve the same worst-case distance.

    Solves for the power-split angle at the crossing, then converts it to the
    boundary gamma via the next segment's weight constant.  The distance
    continuity at the returned gamma is verified to 1e-8.

    Raises
    ------
    NumericalError
        If the crossing equation has no admissible solution or continuity
        fails.
    """
    a, b = _rotated_components_sq(seg_prev.pairs[0], seg_prev.theta_star)
    c, d = _rotated_components_sq(seg_next.pairs[0], seg_next.theta_star)
    w_prev, w_next = seg_prev.weight, seg_next.weight
    if w_next <= 0:
        raise NumericalError("the higher segment must have a positive weight constant")
    if abs(w_prev - w_next) < 1e-15:
        raise NumericalError("consecutive segments share the same weight constant")
    ratio = (w_prev / w_next - 1.0) ** -1 * ((a + w_prev * b) / (c + w_next * d) - 1.0)
    if not 0.0 <= ratio <= 1.0:
        raise NumericalError(
            f"boundary equation gave sin^2(psi) = {ratio:.6g} outside [0, 1]"
        )
    psi = math.asin(math.sqrt(ratio))
    if psi <= 0 or psi >= _HALF_PI:
        raise NumericalError("boundary power-split angle is degenerate")
    gamma = math.atan(math.sqrt(w_next) / math.tan(psi))
    lo = segment_delta(seg_prev.theta_star, w_prev, seg_prev.pairs[0], gamma)
    hi = segment_delta(seg_next.theta_star, w_next, seg_next.pairs[0], gamma)
    if abs(lo - hi) > 1e-8 * max(1.0, abs(hi)):
        raise NumericalError(f"distance mismatch {lo} vs {hi} at boundary {gamma}")
    return gamma


# ---------------------------------------------------------------------------
# Profile construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Candidate:
    theta: float
    weight: float
    delta: float
    pairs: tuple[tuple[int, int], ...]

    @property
    def key(self):
        return (self.pairs, round(self.theta, 9))


def _validate_candidate(order, all_pairs, subset, theta, weight, gamma, floor_delta):
    """Accept (theta, weight) at gamma only if the subset ties exactly at the min."""
    if not 0.0 < theta <= _QUARTER_PI + 1e-9:
        return None
    if weight < 0.0:
        return None
    psi = 0.0 if weight == 0.0 else math.atan(math.sqrt(weight) / math.tan(gamma))
    eps_all = pair_distance_sq(all_pairs[:, 0], all_pairs[:, 1], theta, psi, gamma)
    dmin = float(eps_all.min())
    if dmin <= 0.0:
        return None
    sub_eps = pair_distance_sq(
        np.array([p for p, _ in subset], float),
        np.array([q for _, q in subset], float),
        theta, psi, gamma,
    )
    if np.max(np.abs(sub_eps - dmin)) > 1e-9 * dmin:
        return None
    tied = np.flatnonzero(eps_all <= dmin * (1.0 + 1e-9))
    tied_pairs = {(int(all_pairs[i, 0]), int(all_pairs[i, 1])) for i in tied}
    if tied_pairs != set(subset):
        return None
    if dmin < floor_delta * (1.0 - 1e-9):
        return None
    return _Candidate(theta=theta, weight=weight, delta=dmin,
                      pairs=tuple(sorted(subset)))


def _candidates_at(order, all_pairs, gamma, coarse: SearchGrid):
    """Closed-form candidates seeded from a coarse grid search at one gamma."""
    result = grid_search(gamma, order, coarse)
    eps = pair_distance_sq(all_pairs[:, 0], all_pairs[:, 1], result.theta, result.psi, gamma)
    ranked = [(int(all_pairs[i, 0]), int(all_pairs[i, 1])) for i in np.argsort(eps, kind="stable")]
    found: list[_Candidate] = []
    for pair1, pair2 in itertools.combinations(ranked[:4], 2):
        for theta in _two_pair_angles(pair1, pair2):
            cand = _validate_candidate(order, all_pairs, (pair1, pair2), theta, 0.0,
                                       gamma, result.delta)
            if cand:
                found.append(cand)
    for triple in itertools.combinations(ranked[:6], 3):
        try:
            theta = solve_rotation_angle(*triple, order=order, gamma_mid=gamma)
        except NumericalError:
            continue
        weight = None
        best_cond = 0.0
        for pa, pb in itertools.combinations(triple, 2):
            den = abs(_weight_denominator(pa, pb, theta))
            if den > best_cond:
                try:
                    weight = solve_pair_weight(pa, pb, theta)
                    best_cond = den
                except NumericalError:
                    continue
        if weight is None:
            continue
        cand = _validate_candidate(order, all_pairs, triple, theta, weight,
                                   gamma, result.delta)
        if cand:
            found.append(cand)
    if not found:
        return None
    return max(found, key=lambda c: c.delta)


def _scan_gammas(order: int, step: float) -> np.ndarray:
    gammas = np.arange(step, _QUARTER_PI, step)
    if order >= 256:
        # large constellations switch segments at very small gamma
        fine = np.arange(step / 8.0, 0.05, step / 8.0)
        gammas = np.unique(np.concatenate([fine, gammas]))
    return gammas


def build_profile(order: int, grid: SearchGrid | None = None) -> PrecoderProfile:
    """Construct the full piecewise profile of optimal angles for one QAM order.

    Phase 1 scans gamma with a coarse grid search to discover the tied pair
    sets; every hypothesis is immediately refined by the closed-form solvers
    and accepted only if the tie is exact and attains the global minimum.
    Phase 2 chains the exact boundary equations between consecutive segments.

    Raises
    ------
    NumericalError
        If the scan cannot be resolved into the expected step structure (a
        guard for constellations the step-function assumption has not been
        checked on), with the offending gamma region in the message.
    """
    _sqrt_order(order)
    coarse_step = grid.delta_inc if grid is not None and grid.delta_inc > 0.002 else 0.002
    coarse = SearchGrid(coarse_step)
    all_pairs = _reduced_pairs(order)
    gammas = _scan_gammas(order, coarse_step)

    runs: list[dict] = []
    unresolved: list[float] = []
    for gamma in gammas:
        cand = _candidates_at(order, all_pairs, float(gamma), coarse)
        if cand is None:
            unresolved.append(float(gamma))
            continue
        if runs and runs[-1]["key"] == cand.key:
            runs[-1]["last"] = float(gamma)
        else:
            runs.append({"key": cand.key, "cand": cand, "first": float(gamma),
                         "last": float(gamma)})

    if not runs:
        raise NumericalError(f"profile scan found no valid segment for order {order}")
    if len(unresolved) > max(4, len(gammas) // 20):
        region = f"[{min(unresolved):.4f}, {max(unresolved):.4f}]"
        raise NumericalError(
            f"profile scan for order {order} left {len(unresolved)} gammas "
            f"unresolved in {region}; step structure assumption may not hold"
        )

    first = runs[0]["cand"]
    if first.weight != 0.0 or len(first.pairs) != 2:
        raise NumericalError(
            f"order {order}: lowest segment near gamma={runs[0]['first']:.4f} is not "
            "a two-pair zero-weight segment"
        )
    for run in runs[1:]:
        if len(run["cand"].pairs) != 3:
            raise NumericalError(
                f"order {order}: segment near gamma={run['first']:.4f} does not have "
                "three tied pairs"
            )

    # large constellations can hold co-optimal twin configurations: distinct
    # tied triples (even distinct rotation angles) whose weight constant and
    # rotated-component combination coincide, giving byte-identical distance
    # curves at every gamma; adjacent runs of twins are one segment
    def _curve_params(cand):
        c, d = _rotated_components_sq(cand.pairs[0], cand.theta)
        return cand.weight, c + cand.weight * d

    merged = [runs[0]]
    for run in runs[1:]:
        w_prev, cd_prev = _curve_params(merged[-1]["cand"])
        w_next, cd_next = _curve_params(run["cand"])
        if (abs(w_prev - w_next) <= 1e-12 * max(1.0, w_prev)
                and abs(cd_prev - cd_next) <= 1e-12 * cd_prev):
            span_prev = merged[-1]["last"] - merged[-1]["first"]
            if run["last"] - run["first"] > span_prev:
                merged[-1]["cand"] = run["cand"]
                merged[-1]["key"] = run["key"]
            merged[-1]["last"] = run["last"]
        else:
            merged.append(run)
    runs = merged

    segments: list[PrecoderSegment] = []
    for k, run in enumerate(runs):
        cand = run["cand"]
        segments.append(
            PrecoderSegment(index=k + 1, gamma_lo=0.0, gamma_hi=0.0,
                            theta_star=cand.theta, weight=cand.weight, pairs=cand.pairs)
        )

    cuts = [0.0]
    for k in range(1, len(segments)):
        try:
            boundary = solve_segment_boundary(segments[k - 1], segments[k])
        except NumericalError as exc:
            region = f"[{runs[k - 1]['last']:.4f}, {runs[k]['first']:.4f}]"
            raise NumericalError(
                f"order {order}: boundary between segments {k} and {k + 1} in "
                f"{region} failed: {exc}"
            ) from exc
        if not runs[k - 1]["last"] - 2 * coarse_step <= boundary <= runs[k]["first"] + 2 * coarse_step:
            raise NumericalError(
                f"order {order}: boundary {boundary:.5f} is outside the scanned "
                f"transition window [{runs[k - 1]['last']:.5f}, {runs[k]['first']:.5f}]"
            )
        cuts.append(boundary)
    cuts.append(_QUARTER_PI)

    final = [
        PrecoderSegment(index=seg.index, gamma_lo=cuts[i], gamma_hi=cuts[i + 1],
                        theta_star=seg.theta_star, weight=seg.weight, pairs=seg.pairs)
        for i, seg in enumerate(segments)
    ]
    return PrecoderProfile(order=order, segments=tuple(final))


def eval_profile(profile: PrecoderProfile, gamma: float) -> tuple[float, float, float]:
    """Optimal (theta, psi) and the worst-case squared distance at one gamma.

    psi is atan(sqrt(A) / tan(gamma)) on weighted segments and exactly zero on
    the first segment.  The distance follows the half-difference convention.
    """
    seg = profile.locate(gamma)
    tan_g = math.tan(gamma)
    psi = 0.0 if seg.weight == 0.0 else math.atan(math.sqrt(seg.weight) / tan_g)
    c, d = _rotated_components_sq(seg.pairs[0], seg.theta_star)
    delta = math.sin(gamma) ** 2 * (c + seg.weight * d) / (seg.weight + tan_g * tan_g)
    return seg.theta_star, psi, delta


def profile_delta(profile: PrecoderProfile, gammas: np.ndarray) -> np.ndarray:
    """Vectorized worst-case squared distance over an array of gammas."""
    gammas = np.asarray(gammas, dtype=float)
    idx = np.searchsorted(profile.boundaries, gammas, side="right")
    thetas = np.array([s.theta_star for s in profile.segments])
    weights = np.array([s.weight for s in profile.segments])
    comps = np.array([_rotated_components_sq(s.pairs[0], s.theta_star)
                      for s in profile.segments])
    c = comps[idx, 0]
    d = comps[idx, 1]
    w = weights[idx]
    del thetas  # theta enters only through (c, d)
    return np.sin(gammas) ** 2 * (c + w * d) / (w + np.tan(gammas) ** 2)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def profile_to_dict(profile: PrecoderProfile) -> dict:
    return {
        "order": profile.order,
        "segments": [
            {
                "gamma_lo": seg.gamma_lo,
                "gamma_hi": seg.gamma_hi,
                "theta_star": seg.theta_star,
                "A": seg.weight,
                "pairs": [list(p) for p in seg.pairs],
            }
            for seg in profile.segments
        ],
    }


def profile_from_dict(doc: dict) -> PrecoderProfile:
    segments = tuple(
        PrecoderSegment(
            index=i + 1,
            gamma_lo=float(seg["gamma_lo"]),
            gamma_hi=float(seg["gamma_hi"]),
            theta_star=float(seg["theta_star"]),
            weight=float(seg["A"]),
            pairs=tuple(tuple(int(v) for v in p) for p in seg["pairs"]),
        )
        for i, seg in enumerate(doc["segments"])
    )
    return PrecoderProfile(order=int(doc["order"]), segments=segments)


def save_profile(profile: PrecoderProfile, path) -> None:
    """Write a profile as JSON; floats keep full binary precision."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(profile_to_dict(profile), fh, indent=2)
        fh.write("\n")


def load_profile(path) -> PrecoderProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return profile_from_dict(json.load(fh))
