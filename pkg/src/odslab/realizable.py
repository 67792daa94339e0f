"""Round-budgeted multi-distribution learning in the realizable setting.

Boosting over the k distributions: each of the r rounds fits one predictor on
the current mixture, tests it on every distribution with a calibrated sample
size, and reweights distributions multiplicatively by the test outcome.  The
output is the majority vote of the r predictors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import gf2
from .env import (Environment, FiniteDistribution, Sample, SampleRequest,
                  check_simplex, empirical_error, population_error)
from .gf2 import LinearClass, LinearHypothesis


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class TradeoffParams:
    """Margin, threshold and sample sizes for an r-round budget.

    theta = r / (2 log2 k); p = (1/2) (4 k^{2/r})^{-1/(1-theta)};
    tau = eps / (1 + 1/theta); alpha = (1/2) ln((1-p)/p);
    eps_learner = tau p / 4; delta_learner = delta / (2r);
    m = ceil(c_m (d + ln(1/delta_learner)) / eps_learner);
    n = ceil((12/tau) ln(2 r k / delta)).
    """

    k: int
    r: int
    eps: float
    delta: float
    d: int
    theta: float
    p: float
    tau: float
    alpha: float
    eps_learner: float
    delta_learner: float
    m: int
    n: int
    c_m: float


def tradeoff_params(k: int, r: int, eps: float, delta: float, d: int,
                    c_m: float = 4.0, log_base: float = 2.0) -> TradeoffParams:
    if k < 2:
        raise ParameterError("need k >= 2")
    logk = math.log(k, log_base)
    if not (1 <= r <= logk + 1e-9):
        raise ParameterError(
            f"need 1 <= r <= log_{log_base:g}(k)={logk:.3f}, got r={r}")
    if not (0 < eps < 0.5) or not (0 < delta < 0.5):
        raise ParameterError("eps and delta must lie in (0, 1/2)")
    theta = r / (2.0 * logk)
    p = 0.5 * (4.0 * k ** (2.0 / r)) ** (-1.0 / (1.0 - theta))
    if p >= 0.5:
        raise ParameterError(f"p={p} must be below 1/2")
    tau = eps / (1.0 + 1.0 / theta)
    alpha = 0.5 * math.log((1.0 - p) / p)
    eps_learner = tau * p / 4.0
    delta_learner = delta / (2.0 * r)
    m = math.ceil(c_m * (d + math.log(1.0 / delta_learner)) / eps_learner)
    n = math.ceil((12.0 / tau) * math.log(2.0 * r * k / delta))
    return TradeoffParams(k=k, r=r, eps=eps, delta=delta, d=d, theta=theta, p=p,
                          tau=tau, alpha=alpha, eps_learner=eps_learner,
                          delta_learner=delta_learner, m=m, n=n, c_m=c_m)


@dataclass(frozen=True)
class Ensemble:
    """Majority vote; average vote >= 1/2 predicts 1 (ties go to 1)."""

    members: tuple

    def predict(self, xs) -> np.ndarray:
        votes = np.zeros(np.asarray(xs).shape[0], dtype=np.int64)
        for h in self.members:
            votes += h.predict(xs)
        return (2 * votes >= len(self.members)).astype(np.uint8)


def majority_predict(ensemble: Ensemble, x) -> int:
    """Single-point majority vote; x is wrapped as a one-row batch."""
    if not ensemble.members:
        raise ValueError("empty ensemble")
    if isinstance(x, gf2.Gf2Vector):
        xs = x.words[None, :]
    else:
        xs = np.asarray([x])
    return int(ensemble.predict(xs)[0])


def _sample_to_labeled_rows(sample: Sample):
    xs = []
    ys = []
    for part in sample.parts:
        hit = np.nonzero(part.counts)[0]
        xs.append(part.dist.xs[hit])
        ys.append(part.dist.ys[hit])
    return np.concatenate(xs), np.concatenate(ys)


def _erm_list(sample: Sample, hypotheses: Sequence) -> object:
    errs = [empirical_error(h, sample) for h in hypotheses]
    return hypotheses[int(np.argmin(errs))]


def _bootstrap(sample: Sample, rng: np.random.Generator) -> Sample:
    parts = [p for p in sample.parts if p.total > 0]
    totals = np.array([p.total for p in parts], dtype=np.float64)
    n = int(totals.sum())
    per_part = rng.multinomial(n, totals / totals.sum())
    from .env import SamplePart

    new_parts = []
    for part, ni in zip(parts, per_part):
        counts = rng.multinomial(int(ni), part.counts / part.total).astype(np.int64)
        new_parts.append(SamplePart(part.dist_index, part.dist, counts))
    return Sample(new_parts)


def pac_learn(sample: Sample, hypotheses, rng: Optional[np.random.Generator] = None,
              mode: str = "erm", bags: int = 21):
    """PAC learner backing the boosting rounds.

    mode="erm": empirical risk minimizer, smallest-index tie break for an
    explicit class; for a LinearClass too large to enumerate, solves for a
    consistent functional by Gaussian elimination (valid under realizability).
    mode="bagging": majority vote of ERMs over `bags` bootstrap resamples.
    """
    if mode == "bagging":
        if rng is None:
            raise ValueError("bagging needs an rng")
        members = tuple(
            pac_learn(_bootstrap(sample, rng), hypotheses, mode="erm")
            for _ in range(bags)
        )
        return Ensemble(members)
    if mode != "erm":
        raise ValueError(f"unknown mode {mode!r}")
    if sample.total == 0:
        raise ValueError("cannot learn from an empty sample")
    if isinstance(hypotheses, LinearClass) and not hypotheses.enumerable:
        xs, ys = _sample_to_labeled_rows(sample)
        return gf2.solve_consistent_functional(xs, ys, hypotheses.d)
    hyp_list = list(hypotheses)
    if not hyp_list:
        raise ValueError("empty hypothesis class")
    return _erm_list(sample, hyp_list)


def class_dim_proxy(hypotheses) -> int:
    """Capacity proxy: d for the full linear class, ceil(log2 |H|) otherwise."""
    if isinstance(hypotheses, LinearClass):
        return hypotheses.d
    n = len(list(hypotheses))
    return max(1, math.ceil(math.log2(max(n, 2))))


def run_tradeoff_mdl(
    env: Environment,
    hypotheses,
    r: int,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    c_m: float = 4.0,
    log_base: float = 2.0,
    mode: str = "erm",
    bags: int = 21,
):
    """r rounds of boosted learning on the environment's k distributions.

    Each iteration consumes exactly one environment round holding the mixture
    sample for the learner plus n fresh test draws from every distribution.
    Returns the majority-vote ensemble and a report with exact population
    errors and the ledger snapshot.
    """
    k = env.k
    params = tradeoff_params(k, r, eps, delta, d=class_dim_proxy(hypotheses),
                             c_m=c_m, log_base=log_base)
    q = np.full(k, 1.0 / k)
    members = []
    weight_history = [q.copy()]
    test_errors = np.zeros((r, k))
    for t in range(r):
        requests = [SampleRequest.from_mixture(q, params.m)]
        requests += [SampleRequest.pure(j, params.n) for j in range(k)]
        samples = env.request_round(requests, rng)
        h_t = pac_learn(samples[0], hypotheses, rng=rng, mode=mode, bags=bags)
        members.append(h_t)
        factors = np.empty(k)
        for j in range(k):
            e = empirical_error(h_t, samples[1 + j])
            test_errors[t, j] = e
            factors[j] = math.exp(-params.alpha) if e <= params.tau / 2 else math.exp(params.alpha)
        q = q * factors
        q = q / q.sum()
        q = check_simplex(q)
        weight_history.append(q.copy())
    ensemble = Ensemble(tuple(members))
    per_dist = [population_error(ensemble, dist) for dist in env.dists]
    max_err = max(per_dist)
    report = {
        "k": k,
        "r": r,
        "eps": eps,
        "delta": delta,
        "max_pop_error": max_err,
        "per_dist_errors": per_dist,
        "success": max_err <= eps,
        "test_errors": test_errors,
        "weight_history": np.array(weight_history),
        "params": params,
        **env.ledger.snapshot(),
    }
    return ensemble, report


def check_majority_margin_bound(hypotheses: Sequence, weights, dist: FiniteDistribution,
                                tau: float, theta: float):
    """Exact check of the weighted-majority error bound on finite support.

    Premise: the weight on predictors with error <= tau exceeds the weight on
    the rest by a theta margin.  Whenever it holds, the weighted-majority
    error is asserted to be at most (1 + 1/theta) * tau.  Returns
    (premise_holds, majority_error, bound).
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.min(initial=0.0) < 0:
        raise ValueError("weights must be nonnegative")
    if w.sum() <= 0:
        raise ValueError("weights must not all vanish")
    errs = np.array([population_error(h, dist) for h in hypotheses])
    good = errs <= tau
    premise = (w[good].sum() - w[~good].sum()) >= theta * w.sum()
    votes = np.zeros(dist.size)
    for wi, h in zip(w, hypotheses):
        votes += wi * h.predict(dist.xs)
    majority = (votes >= w.sum() / 2).astype(np.uint8)
    majority_error = float(dist.ps[majority != dist.ys].sum())
    bound = (1.0 + 1.0 / theta) * tau
    if premise:
        assert majority_error <= bound + 1e-12, (
            f"majority error {majority_error} exceeds bound {bound}")
    return bool(premise), majority_error, bound
