"""Concave maximization over the simplex through a cap-gated first-order oracle.

The optimizer may only query points inside an observable region determined by
a monotone cap vector, and each cap lift starts a new sampling round.  Two
region geometries are supported: a coordinate-wise box and the ellipsoid
sum_i w_i^2 / cap_i <= 1.  Also provides the adversarial min-of-affine
objectives whose critical indices can only be uncovered one prefix at a time,
plus brute-force verifiers for their structural properties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .env import check_simplex
from .hedge import HedgeHistory, check_rewards, hedge_step

BOX = "box"
ELLIPSOID = "ellipsoid"
REGIONS = (BOX, ELLIPSOID)

LARGE_EPS = "large_eps"
SMALL_EPS = "small_eps"
ADVERSARIAL_KINDS = (LARGE_EPS, SMALL_EPS)

ELLIPSOID_TOL = 1e-12


class GridInconclusive(RuntimeError):
    """Grid too coarse to contain any near-maximizer."""


def _check_region(kind: str) -> str:
    if kind not in REGIONS:
        raise ValueError(f"region kind must be one of {REGIONS}, got {kind!r}")
    return kind


def region_contains(kind: str, cap, w) -> bool:
    """Membership of w in the observable region of the cap vector.

    Box: w_i <= cap_i for all i.  Ellipsoid: sum w_i^2 / cap_i <= 1, where a
    zero w_i contributes 0 regardless of its cap and a positive w_i over a
    zero cap makes the sum infinite.
    """
    _check_region(kind)
    cap = np.asarray(cap, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if cap.shape != w.shape:
        raise ValueError("cap and weight vectors must have equal length")
    if kind == BOX:
        return bool(np.all(w <= cap))
    active = w > 0
    if np.any(cap[active] == 0):
        return False
    return float((w[active] ** 2 / cap[active]).sum()) <= 1.0 + ELLIPSOID_TOL


def lift_cap(weight_history, C: float) -> np.ndarray:
    """Entrywise C * max over the history, clamped at 1."""
    if C <= 1:
        raise ValueError("cap margin C must exceed 1")
    hist = np.atleast_2d(np.asarray(weight_history, dtype=np.float64))
    if hist.shape[0] == 0:
        raise ValueError("weight history must be nonempty")
    return np.minimum(1.0, C * hist.max(axis=0))


@dataclass
class OracleResponse:
    value: float
    supergradient: np.ndarray
    active_index: Optional[int] = None  # position into the critical list, 0-based


class CapTracker:
    """Cap-lift bookkeeping: rounds, culprits, monotonicity, query legality."""

    def __init__(self, kind: str, k: int, C: float):
        self.kind = _check_region(kind)
        if C <= 1:
            raise ValueError("cap margin C must exceed 1")
        self.k = k
        self.C = C
        self.cap = np.zeros(k)
        self.maxw = np.zeros(k)
        self.rounds = 0
        self.culprit_counts = np.zeros(k, dtype=np.int64)
        self.update_iterations: list[int] = []

    def observe(self, w: np.ndarray, iteration: int) -> bool:
        """Account for the next iterate; lift the cap if it left the region.

        Returns True when a new round started.  Asserts that the iterate is
        observable afterwards and that the cap never decreased.
        """
        self.maxw = np.maximum(self.maxw, w)
        updated = False
        if not region_contains(self.kind, self.cap, w):
            if self.kind == BOX:
                culprit = int(np.nonzero(w > self.cap)[0][0])
                self.culprit_counts[culprit] += 1
            new_cap = np.minimum(1.0, self.C * self.maxw)
            assert np.all(new_cap >= self.cap - 1e-15), "cap must be monotone"
            self.cap = new_cap
            self.rounds += 1
            self.update_iterations.append(iteration)
            updated = True
        assert region_contains(self.kind, self.cap, w), "query outside observable region"
        return updated

    @property
    def overhead(self) -> float:
        return float(self.cap.sum())


@dataclass
class LazyHedgeResult:
    w_hat: np.ndarray
    rounds: int
    overhead: float
    history: HedgeHistory
    cap: np.ndarray
    maxw: np.ndarray
    culprit_counts: np.ndarray
    update_iterations: list

    @property
    def trajectory_sum_max(self) -> float:
        return float(self.maxw.sum())


def lazy_hedge_maximize(
    oracle,
    k: int,
    eps: float,
    C: float = 2.0,
    kind: str = BOX,
    rng: Optional[np.random.Generator] = None,
    c_T: float = 4.0,
    c_eta: float = 1.0,
) -> LazyHedgeResult:
    """Hedge ascent on a concave f known only through a capped oracle.

    Runs T = ceil(c_T ln(k) / eps^2) iterations with step eta = c_eta * eps,
    lifting the cap (one round) only when the iterate leaves the observable
    region, and returns the average iterate.  Oracle supergradient entries
    must lie in [0, 1].
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    T = max(1, math.ceil(c_T * math.log(k) / eps**2)) if k > 1 else 1
    eta = c_eta * eps
    tracker = CapTracker(kind, k, C)
    w = np.full(k, 1.0 / k)
    acc = np.zeros(k)
    weights = np.empty((T, k))
    rewards = np.empty((T, k))
    for t in range(T):
        tracker.observe(w, t)
        resp = oracle.query(w)
        grad = check_rewards(resp.supergradient, k)
        weights[t] = w
        rewards[t] = grad
        acc += w
        w = hedge_step(w, grad, eta)
    history = HedgeHistory(weights, rewards, eta)
    return LazyHedgeResult(
        w_hat=acc / T,
        rounds=tracker.rounds,
        overhead=tracker.overhead,
        history=history,
        cap=tracker.cap.copy(),
        maxw=tracker.maxw.copy(),
        culprit_counts=tracker.culprit_counts.copy(),
        update_iterations=list(tracker.update_iterations),
    )


def box_round_ceiling(k: int, C: float) -> int:
    """k * (ceil(log_C k) + 1), the per-index culprit budget times k."""
    return k * (math.ceil(math.log(k) / math.log(C)) + 1)


def culprit_ceiling(k: int, C: float) -> int:
    return math.ceil(math.log(k) / math.log(C)) + 1


def ellipsoid_round_ceiling(k: int, C: float, eps: float, c_ell: float = 1.0) -> float:
    return c_ell * math.sqrt(k / C) * math.log(k / eps) ** 8


def box_polylog_ceiling(k: int, C: float, eps: float, c_box: float = 1.0) -> float:
    return c_box * (k / C) * math.log(k / eps) ** 9


def trajectory_ceiling(k: int, eps: float, c: float = 1.0) -> float:
    """Threshold for sum_i max_t w_i; the hidden constant is configurable."""
    return c * math.log(k / eps) ** 8


# ---------------------------------------------------------------------------
# adversarial objectives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdversarialInstance:
    """Min-of-affine objective with hidden critical indices.

    large_eps: f(w) = min_j (w_{c_j} + (j+1)/m^2)
    small_eps: f(w) = min_j (a_j w_{c_j} + b_j), a_j = 2^{-(j+1)},
               b_j = (1 - a_j)/m,
    with j the 0-based position into the critical index list.
    """

    kind: str
    k: int
    m: int
    critical: tuple

    def __post_init__(self):
        if self.kind not in ADVERSARIAL_KINDS:
            raise ValueError(f"kind must be one of {ADVERSARIAL_KINDS}")
        if not (1 <= self.m <= self.k):
            raise ValueError("need 1 <= m <= k")
        if len(set(self.critical)) != self.m:
            raise ValueError("critical indices must be distinct")

    def _coeffs(self):
        j = np.arange(1, self.m + 1, dtype=np.float64)
        if self.kind == LARGE_EPS:
            return np.ones(self.m), j / self.m**2
        a = 2.0**-j
        return a, (1.0 - a) / self.m

    def _terms(self, w: np.ndarray) -> np.ndarray:
        a, b = self._coeffs()
        return a * np.asarray(w, dtype=np.float64)[list(self.critical)] + b

    def value(self, w) -> float:
        return float(self._terms(w).min())

    def value_many(self, ws: np.ndarray) -> np.ndarray:
        a, b = self._coeffs()
        return (a * ws[:, list(self.critical)] + b).min(axis=1)

    def query(self, w) -> OracleResponse:
        """First-order oracle: minimal position attaining the minimum, value,
        and the supergradient supported on that critical coordinate."""
        terms = self._terms(w)
        j = int(np.argmin(terms))  # argmin takes the first, i.e. minimal j
        grad = np.zeros(self.k)
        a, _ = self._coeffs()
        grad[self.critical[j]] = a[j]
        return OracleResponse(value=float(terms[j]), supergradient=grad, active_index=j)

    @property
    def f_star(self) -> float:
        if self.kind == LARGE_EPS:
            return (3 * self.m + 1) / (2 * self.m**2)
        return 1.0 / self.m

    def maximizer(self) -> np.ndarray:
        w = np.zeros(self.k)
        if self.kind == LARGE_EPS:
            for j, c in enumerate(self.critical, start=1):
                w[c] = (3 * self.m + 1) / (2 * self.m**2) - j / self.m**2
        else:
            for c in self.critical:
                w[c] = 1.0 / self.m
        return w

    @property
    def locality_threshold(self) -> float:
        """Weight level below which the oracle response is determined by the
        prefix of critical indices up to that position."""
        return 1.0 / self.m**2 if self.kind == LARGE_EPS else 1.0 / (2 * self.m)

    def max_eps_for_characterization(self) -> float:
        if self.kind == LARGE_EPS:
            return 1.0 / (2 * self.k)
        return 2.0 ** (-(self.k + 1) / 2) / (2 * self.k)


def make_adversarial(kind: str, k: int, m: int, rng: np.random.Generator) -> AdversarialInstance:
    if m > k:
        raise ValueError("need m <= k")
    critical = tuple(int(i) for i in rng.choice(k, size=m, replace=False))
    return AdversarialInstance(kind=kind, k=k, m=m, critical=critical)


@dataclass(frozen=True)
class MinAffineOracle:
    """Generic concave test objective: min of affine pieces with gradients in
    [0,1]^k, giving cheap exact supergradients."""

    gradients: np.ndarray  # (P, k)
    offsets: np.ndarray  # (P,)

    def value(self, w) -> float:
        return float((self.gradients @ np.asarray(w) + self.offsets).min())

    def query(self, w) -> OracleResponse:
        vals = self.gradients @ np.asarray(w) + self.offsets
        j = int(np.argmin(vals))
        return OracleResponse(value=float(vals[j]),
                              supergradient=self.gradients[j].copy(),
                              active_index=None)


def make_random_concave(k: int, pieces: int, rng: np.random.Generator) -> MinAffineOracle:
    return MinAffineOracle(gradients=rng.random((pieces, k)),
                           offsets=rng.random(pieces))


# ---------------------------------------------------------------------------
# brute-force verifiers
# ---------------------------------------------------------------------------

def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the simplex with coordinates multiples of 1/resolution."""
    if k == 1:
        return np.ones((1, 1))
    bars = combinations(range(resolution + k - 1), k - 1)
    flat = np.fromiter(
        (x for combo in bars for x in combo), dtype=np.int64
    ).reshape(-1, k - 1)
    bounds = np.concatenate(
        [np.full((flat.shape[0], 1), -1), flat,
         np.full((flat.shape[0], 1), resolution + k - 1)], axis=1)
    counts = np.diff(bounds, axis=1) - 1
    return counts / resolution


def verify_approx_max_characterization(
    inst: AdversarialInstance, eps: float, grid_resolution: int
) -> bool:
    """Exhaustively check that every grid point within eps of the maximum puts
    weight >= 1/(2m) on at least half the critical indices."""
    if inst.k > 8 or inst.m > 3:
        raise ValueError("brute-force regime is k <= 8, m <= 3")
    if eps > inst.max_eps_for_characterization() + 1e-15:
        raise ValueError("eps above the regime where the characterization holds")
    grid = simplex_grid(inst.k, grid_resolution)
    vals = inst.value_many(grid)
    near = vals >= inst.f_star - eps - 1e-12
    if not near.any():
        raise GridInconclusive("no grid point is an eps-approximate maximizer")
    heavy = (grid[:, list(inst.critical)] >= 1.0 / (2 * inst.m) - 1e-12).sum(axis=1)
    return bool(np.all(heavy[near] >= inst.m / 2))


def _responses_equal(a: OracleResponse, b: OracleResponse) -> bool:
    return (
        a.value == b.value
        and a.active_index == b.active_index
        and np.array_equal(a.supergradient, b.supergradient)
    )


def verify_oracle_locality(
    inst: AdversarialInstance,
    trials: int,
    rng: np.random.Generator,
    resamples: int = 20,
) -> bool:
    """Whenever some prefix-critical weight is at most the locality threshold,
    the oracle response must not depend on the later critical indices.

    Each trial builds a random premise-satisfying w at a random level j, then
    redraws the suffix indices and checks the response is bit-identical.
    """
    k, m = inst.k, inst.m
    thr = inst.locality_threshold
    for _ in range(trials):
        j = int(rng.integers(1, m + 1))  # premise level: positions 0..j-1
        low_pos = int(rng.integers(0, j))
        low_mass = float(rng.random()) * thr
        w = np.zeros(k)
        others = [i for i in range(k) if i != inst.critical[low_pos]]
        w[others] = rng.dirichlet(np.ones(k - 1)) * (1.0 - low_mass)
        w[inst.critical[low_pos]] = low_mass
        base = inst.query(w)
        prefix = inst.critical[:j]
        pool = [i for i in range(k) if i not in prefix]
        for _ in range(resamples):
            suffix = tuple(int(i) for i in rng.choice(pool, size=m - j, replace=False))
            other = AdversarialInstance(kind=inst.kind, k=k, m=m,
                                        critical=prefix + suffix)
            if not _responses_equal(base, other.query(w)):
                return False
    return True
