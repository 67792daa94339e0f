"""Multi-distribution sampling environment with exact finite-support errors.

Samples are returned as count multisets over the finite supports, which is
distributionally identical to drawing labeled examples one by one and keeps
million-sample batches cheap.  A ledger enforces the batched round and
per-distribution sample accounting.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .gf2 import Gf2Vector, pack_bits

SIMPLEX_ATOL = 1e-9
MASS_ATOL = 1e-12


class EmptyBatch(ValueError):
    pass


class EmptySample(ValueError):
    pass


def check_simplex(w, k: Optional[int] = None, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or (k is not None and w.size != k):
        raise ValueError(f"weight vector has shape {w.shape}, expected length {k}")
    if w.min(initial=0.0) < -atol:
        raise ValueError("negative weight in simplex vector")
    if abs(w.sum() - 1.0) > atol:
        raise ValueError(f"weights sum to {w.sum()}, not 1")
    return np.clip(w, 0.0, None)


@dataclass(frozen=True)
class LabeledExample:
    x: object
    y: int

    def __post_init__(self):
        if self.y not in (0, 1):
            raise ValueError("label must be 0 or 1")


class FiniteDistribution:
    """Finite-support distribution over labeled examples.

    xs is either a packed (N, W) uint64 matrix (GF(2) domain) or an int64
    array of abstract domain ids; ys are bit labels; ps the point masses.
    """

    def __init__(self, xs, ys, ps, validate: bool = True):
        self.xs = np.asarray(xs)
        self.ys = np.asarray(ys, dtype=np.uint8)
        self.ps = np.asarray(ps, dtype=np.float64)
        if validate:
            self._validate()

    def _validate(self):
        n = len(self.ys)
        if self.xs.shape[0] != n or self.ps.shape != (n,):
            raise ValueError("support arrays have mismatched lengths")
        if self.ps.min(initial=0.0) < 0:
            raise ValueError("negative probability mass")
        if abs(self.ps.sum() - 1.0) > MASS_ATOL:
            raise ValueError(f"masses sum to {self.ps.sum()}, not 1")
        if not np.all(self.ys <= 1):
            raise ValueError("labels must be bits")
        pairs = np.concatenate(
            [np.ascontiguousarray(self.xs).view(np.uint8).reshape(n, -1),
             self.ys[:, None]], axis=1)
        if np.unique(pairs, axis=0).shape[0] != n:
            raise ValueError("support entries are not distinct")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple], validate: bool = True) -> "FiniteDistribution":
        """Build from (x, y, p) triples; x either Gf2Vector or int."""
        xs_raw = [x for x, _, _ in pairs]
        ys = [y for _, y, _ in pairs]
        ps = [p for _, _, p in pairs]
        if xs_raw and isinstance(xs_raw[0], Gf2Vector):
            xs = np.stack([x.words for x in xs_raw])
        else:
            xs = np.asarray(xs_raw, dtype=np.int64)
        return cls(xs, ys, ps, validate=validate)

    @property
    def size(self) -> int:
        return len(self.ys)


@dataclass
class SamplePart:
    """Count multiset over one distribution's support."""

    dist_index: int
    dist: FiniteDistribution
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class Sample:
    parts: list

    @property
    def total(self) -> int:
        return sum(p.total for p in self.parts)

    @classmethod
    def from_examples(cls, examples: Sequence[LabeledExample]) -> "Sample":
        """Unit-count sample from literal labeled examples (tests, small cases)."""
        xs_raw = [e.x for e in examples]
        if xs_raw and isinstance(xs_raw[0], Gf2Vector):
            xs = np.stack([x.words for x in xs_raw])
        else:
            xs = np.asarray(xs_raw, dtype=np.int64)
        ys = np.array([e.y for e in examples], dtype=np.uint8)
        dist = FiniteDistribution(xs, ys, np.full(len(examples), 1.0 / len(examples)),
                                  validate=False)
        return cls([SamplePart(-1, dist, np.ones(len(examples), dtype=np.int64))])


@dataclass
class SampleRequest:
    """Pure(index) or Mixture(weights) draw request of a given count."""

    count: int
    dist: Optional[int] = None
    mixture: Optional[np.ndarray] = None

    @classmethod
    def pure(cls, dist: int, count: int) -> "SampleRequest":
        return cls(count=count, dist=dist)

    @classmethod
    def from_mixture(cls, weights, count: int) -> "SampleRequest":
        return cls(count=count, mixture=np.asarray(weights, dtype=np.float64))


@dataclass
class SampleLedger:
    k: int
    per_dist_counts: np.ndarray = None
    rounds_used: int = 0
    round_open: bool = False

    def __post_init__(self):
        if self.per_dist_counts is None:
            self.per_dist_counts = np.zeros(self.k, dtype=np.int64)

    @property
    def samples_total(self) -> int:
        return int(self.per_dist_counts.sum())

    def snapshot(self) -> dict:
        return {
            "samples_total": self.samples_total,
            "samples_per_dist": [int(c) for c in self.per_dist_counts],
            "rounds_used": self.rounds_used,
        }


class Environment:
    """Sampling access to k finite distributions under batched rounds.

    Within request_round the whole batch is fulfilled before anything is
    returned, so per-batch counts cannot depend on that batch's samples.
    """

    def __init__(self, dists: Sequence[FiniteDistribution]):
        self.dists = list(dists)
        self.ledger = SampleLedger(len(self.dists))

    @property
    def k(self) -> int:
        return len(self.dists)

    def request_round(self, requests: Sequence[SampleRequest],
                      rng: np.random.Generator) -> list:
        if not requests:
            raise EmptyBatch("a round must contain at least one request")
        for req in requests:
            if req.count < 0:
                raise ValueError("negative sample count")
            if (req.dist is None) == (req.mixture is None):
                raise ValueError("request must be pure or mixture, not both")
            if req.dist is not None and not (0 <= req.dist < self.k):
                raise ValueError(f"distribution index {req.dist} out of range")
            if req.mixture is not None:
                check_simplex(req.mixture, self.k)
        if all(req.count == 0 for req in requests):
            warnings.warn("vacuous batch (all counts zero) still consumes a round")
        self.ledger.round_open = True
        samples = []
        for req in requests:
            if req.dist is not None:
                samples.append(self._draw_pure(req.dist, req.count, rng))
            else:
                samples.append(self._draw_mixture(req.mixture, req.count, rng))
        self.ledger.rounds_used += 1
        self.ledger.round_open = False
        return samples

    def _draw_pure(self, i: int, n: int, rng) -> Sample:
        dist = self.dists[i]
        counts = (rng.multinomial(n, dist.ps) if n > 0
                  else np.zeros(dist.size, dtype=np.int64))
        self.ledger.per_dist_counts[i] += n
        return Sample([SamplePart(i, dist, counts.astype(np.int64))])

    def _draw_mixture(self, weights, n: int, rng) -> Sample:
        w = check_simplex(weights, self.k)
        per_dist = rng.multinomial(n, w) if n > 0 else np.zeros(self.k, dtype=np.int64)
        parts = []
        for i, ni in enumerate(per_dist):
            ni = int(ni)
            if ni == 0:
                continue
            dist = self.dists[i]
            counts = rng.multinomial(ni, dist.ps).astype(np.int64)
            parts.append(SamplePart(i, dist, counts))
            self.ledger.per_dist_counts[i] += ni
        return Sample(parts)


# ---------------------------------------------------------------------------
# predictors and exact errors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstPredictor:
    bit: int

    def predict(self, xs) -> np.ndarray:
        return np.full(np.asarray(xs).shape[0], self.bit, dtype=np.uint8)


@dataclass(frozen=True)
class TablePredictor:
    """Label table over an integer domain."""

    table: tuple

    def predict(self, xs) -> np.ndarray:
        return np.asarray(self.table, dtype=np.uint8)[np.asarray(xs, dtype=np.int64)]


@dataclass(frozen=True)
class ThresholdPredictor:
    """1[x >= c] over an ordered integer domain."""

    c: int

    def predict(self, xs) -> np.ndarray:
        return (np.asarray(xs, dtype=np.int64) >= self.c).astype(np.uint8)


def population_error(predictor, dist: FiniteDistribution) -> float:
    """Exact weighted disagreement mass of the predictor on the distribution."""
    pred = predictor.predict(dist.xs)
    return float(dist.ps[pred != dist.ys].sum())


def empirical_error(predictor, sample) -> float:
    """Fraction of sample points where the predictor disagrees with the label."""
    if not isinstance(sample, Sample):
        examples = [e if isinstance(e, LabeledExample) else LabeledExample(*e)
                    for e in sample]
        if not examples:
            raise EmptySample("empirical error of an empty sample is undefined")
        sample = Sample.from_examples(examples)
    total = sample.total
    if total == 0:
        raise EmptySample("empirical error of an empty sample is undefined")
    wrong = 0
    for part in sample.parts:
        if part.total == 0:
            continue
        pred = predictor.predict(part.dist.xs)
        wrong += int(part.counts[pred != part.dist.ys].sum())
    return wrong / total


def minimax_opt(hypotheses: Iterable, dists: Sequence[FiniteDistribution]) -> float:
    """min over the class of the max population error across distributions."""
    best = None
    for h in hypotheses:
        worst = max(population_error(h, dist) for dist in dists)
        if best is None or worst < best:
            best = worst
    if best is None:
        raise ValueError("empty hypothesis class")
    return best


def pack_domain(vectors: Sequence[Gf2Vector]) -> np.ndarray:
    return np.stack([v.words for v in vectors])


def bits_domain(bits_rows) -> np.ndarray:
    return pack_bits(np.asarray(bits_rows, dtype=np.uint8))
