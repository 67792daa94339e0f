"""Generators for planted multi-distribution instances and agnostic test beds.

The planted family places a hidden linear functional over GF(2)^d and one
uniform-over-subspace distribution per task, with subspace dimensions drawn
from a geometric ladder of difficulty levels.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import gf2
from .env import Environment, FiniteDistribution, ThresholdPredictor
from .gf2 import Gf2Basis, Gf2Vector, LinearClass, LinearHypothesis

MASS_ATOL = 1e-12


class GenerationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class DifficultySpec:
    """Distribution over subspace dimensions: d0 with mass 1/k and
    d0/alpha^i with mass (alpha^i - alpha^{i-1})/k for i = 1..r."""

    k: int
    r: int
    d0: int
    alpha: float
    levels: tuple  # ((value, mass), ...) sorted by decreasing value

    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.levels], dtype=np.int64)

    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.levels], dtype=np.float64)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.values(), size=size, p=self.masses())

    @property
    def mean(self) -> float:
        return float((self.values() * self.masses()).sum())


def build_difficulty_spec(k: int, r: int, d0: int) -> DifficultySpec:
    if k < 2:
        raise ValueError("need k >= 2")
    if not (1 <= r <= math.log2(k) + 1e-9):
        raise ValueError(f"need 1 <= r <= log2(k)={math.log2(k):.3f}, got {r}")
    if d0 < k:
        raise ValueError("need d0 >= k")
    alpha = k ** (1.0 / r)
    raw = [(float(d0), 1.0 / k)]
    for i in range(1, r + 1):
        raw.append((d0 / alpha**i, (alpha**i - alpha ** (i - 1)) / k))
    merged: dict[int, float] = {}
    for value, mass in raw:
        v = max(1, int(round(value)))
        merged[v] = merged.get(v, 0.0) + mass
    levels = tuple(sorted(merged.items(), key=lambda t: -t[0]))
    total = sum(m for _, m in levels)
    if abs(total - 1.0) > MASS_ATOL:
        raise ValueError(f"difficulty masses sum to {total}, not 1")
    return DifficultySpec(k=k, r=r, d0=d0, alpha=alpha, levels=levels)


def default_ambient_dim(d0: int, k: int, scale: float = 2.0) -> int:
    """d = ceil(scale * d0 * ln k); the constant is configurable."""
    return int(math.ceil(scale * d0 * math.log(max(k, 2))))


@dataclass
class PlantedMdlInstance:
    d: int
    hstar: LinearHypothesis
    bases: list
    diffs: list
    dists: list
    rejections: int = 0
    seed: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.dists)

    def environment(self) -> Environment:
        return Environment(self.dists)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "hstar": self.hstar.w.to_hex(),
                "bases": [b.to_hex_rows() for b in self.bases],
                "diffs": [int(x) for x in self.diffs],
                "rejections": self.rejections,
                "seed": self.seed,
            }
        )

    @classmethod
    def from_json(cls, s: str) -> "PlantedMdlInstance":
        obj = json.loads(s)
        d = obj["d"]
        hstar = LinearHypothesis(Gf2Vector.from_hex(d, obj["hstar"]))
        bases = [Gf2Basis.from_hex_rows(d, rows) for rows in obj["bases"]]
        dists = [_uniform_subspace_dist(b, hstar) for b in bases]
        return cls(d=d, hstar=hstar, bases=bases, diffs=obj["diffs"], dists=dists,
                   rejections=obj.get("rejections", 0), seed=obj.get("seed"))


def _uniform_subspace_dist(basis: Gf2Basis, hstar: LinearHypothesis) -> FiniteDistribution:
    pts = basis.enumerate_points()
    ys = hstar.predict(pts)
    ps = np.full(pts.shape[0], 1.0 / pts.shape[0])
    return FiniteDistribution(pts, ys, ps, validate=False)


def gen_planted_mdl(
    d: int,
    spec: DifficultySpec,
    rng: np.random.Generator,
    max_rejects: int = 1000,
    seed: Optional[int] = None,
) -> PlantedMdlInstance:
    """Planted realizable instance: k jointly independent subspaces with
    dimensions drawn from the difficulty ladder, labels from a hidden linear
    functional drawn uniformly from all 2^d."""
    rejections = 0
    for _ in range(max_rejects):
        diffs = spec.sample(rng, spec.k)
        if int(diffs.sum()) <= d:
            break
        rejections += 1
    else:
        raise GenerationFailed(
            f"difficulty draws kept exceeding d={d} after {max_rejects} tries")
    bases = gf2.sample_independent_subspaces(d, diffs, rng)
    hstar = LinearHypothesis(Gf2Vector.random(d, rng))
    dists = [_uniform_subspace_dist(b, hstar) for b in bases]
    inst = PlantedMdlInstance(d=d, hstar=hstar, bases=bases,
                              diffs=[int(x) for x in diffs], dists=dists,
                              rejections=rejections, seed=seed)
    _check_planted(inst)
    return inst


def gen_single_planted(
    d: int, spec: DifficultySpec, rng: np.random.Generator, seed: Optional[int] = None
) -> PlantedMdlInstance:
    """Single-distribution variant: one difficulty draw, no rejection."""
    if d < spec.d0:
        raise ValueError("ambient dimension below the largest difficulty level")
    diff = int(spec.sample(rng, 1)[0])
    bases = gf2.sample_independent_subspaces(d, [diff], rng)
    hstar = LinearHypothesis(Gf2Vector.random(d, rng))
    dists = [_uniform_subspace_dist(bases[0], hstar)]
    inst = PlantedMdlInstance(d=d, hstar=hstar, bases=bases, diffs=[diff],
                              dists=dists, rejections=0, seed=seed)
    _check_planted(inst)
    return inst


def _check_planted(inst: PlantedMdlInstance):
    union = np.concatenate([b.row_matrix() for b in inst.bases])
    assert gf2.rank_words(union, inst.d) == sum(inst.diffs)
    for dist in inst.dists:
        pred = inst.hstar.predict(dist.xs)
        assert not np.any(pred != dist.ys), "planted functional must have zero error"


def random_linear_subclass(
    d: int,
    size: int,
    rng: np.random.Generator,
    include: Optional[LinearHypothesis] = None,
) -> list:
    """Distinct random linear functionals, optionally forcing one member in.

    Gives a small enumerable class containing a planted functional, for
    treating realizable instances agnostically.
    """
    if size < 1 or (include is None and size < 1):
        raise ValueError("size must be >= 1")
    seen = set()
    out = []
    if include is not None:
        seen.add(include.w)
        out.append(include)
    tries = 0
    while len(out) < size:
        v = Gf2Vector.random(d, rng)
        tries += 1
        if tries > 100 * size + 1000:
            raise GenerationFailed("could not draw enough distinct functionals")
        if v in seen:
            continue
        seen.add(v)
        out.append(LinearHypothesis(v))
    perm = rng.permutation(len(out))
    return [out[i] for i in perm]


def gen_agnostic_finite(
    k: int,
    domain_size: int,
    noise: float,
    rng: np.random.Generator,
    kind: str = "threshold",
):
    """Small agnostic test bed with an enumerable class and exact OPT.

    kind="threshold": ordered integer domain, class of all 1[x >= c].
    kind="linear": domain GF(2)^d with 2^d = domain_size <= 4096, full
    linear class.  Labels follow a planted ground truth, flipped with the
    given noise mass per point, so noise=0 is realizable.
    """
    if not (0.0 <= noise < 0.5):
        raise ValueError("noise must lie in [0, 0.5)")
    if kind == "threshold":
        hyps = [ThresholdPredictor(c) for c in range(domain_size + 1)]
        cstar = int(rng.integers(0, domain_size + 1))
        truth = lambda xs: (xs >= cstar).astype(np.uint8)
        domain = np.arange(domain_size, dtype=np.int64)
    elif kind == "linear":
        d = int(round(math.log2(domain_size)))
        if 2**d != domain_size or domain_size > 4096:
            raise ValueError("linear domain_size must be a power of two <= 4096")
        cls = LinearClass(d)
        hyps = list(cls)
        hstar = LinearHypothesis(Gf2Vector.random(d, rng))
        full = Gf2Basis.from_vectors(
            [Gf2Vector.from_int(d, 1 << j) for j in range(d)]).enumerate_points()
        truth = lambda xs: hstar.predict(xs)
        domain = full
    else:
        raise ValueError(f"unknown kind {kind!r}")

    dists = []
    n = domain.shape[0]
    for _ in range(k):
        base = rng.dirichlet(np.ones(n))
        ys_true = truth(domain)
        if noise == 0.0:
            dists.append(FiniteDistribution(domain, ys_true, base, validate=False))
        else:
            xs2 = np.concatenate([domain, domain])
            ys2 = np.concatenate([ys_true, 1 - ys_true])
            ps2 = np.concatenate([base * (1 - noise), base * noise])
            dists.append(FiniteDistribution(xs2, ys2, ps2, validate=False))
    return hyps, dists
