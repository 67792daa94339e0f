"""Agnostic multi-distribution learning with lazily-updated Hedge.

Runs T hedge iterations over the k distributions but only samples when the
iterate escapes the observable region of the current cap vector: each cap
lift is one environment round that tops up the persistent ERM datasets S_i
and every still-unconsumed fresh reward dataset S_{i,t'}.  The output is the
uniform randomized classifier over the T per-iteration ERM minimizers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .env import (Environment, FiniteDistribution, Sample, SamplePart,
                  SampleRequest, empirical_error, population_error)
from .hedge import HedgeHistory, hedge_step
from .realizable import class_dim_proxy
from .simplex_opt import BOX, CapTracker


@dataclass(frozen=True)
class LazyMdlConstants:
    """Hidden-constant knobs: dataset floors are cap_i * N_erm and
    cap_i * N_rwd with N_erm = ceil(n_erm_coeff (d + k) ln(k/(eps delta)) / eps^2)
    and N_rwd = ceil(n_rwd_coeff * k)."""

    n_erm_coeff: float = 1.0
    n_rwd_coeff: float = 4.0
    c_T: float = 4.0
    c_eta: float = 1.0
    delta: float = 0.1


@dataclass(frozen=True)
class RandomizedClassifier:
    """Uniform mixture of the T per-iteration predictors."""

    members: tuple

    def __len__(self) -> int:
        return len(self.members)


def randomized_error(classifier: RandomizedClassifier, dist: FiniteDistribution) -> float:
    """Error of the randomized classifier: the average of the members' exact
    population errors."""
    if not classifier.members:
        raise ValueError("empty randomized classifier")
    return float(np.mean([population_error(h, dist) for h in classifier.members]))


def erm_weighted(hypotheses: Sequence, erm_samples: Sequence[Sample], w):
    """Exact argmin over the class of sum_i w_i err(h, S_i), smallest index
    winning ties; an empty S_i is allowed only under zero weight."""
    w = np.asarray(w, dtype=np.float64)
    hyp_list = list(hypotheses)
    if not hyp_list:
        raise ValueError("empty hypothesis class")
    for wi, s in zip(w, erm_samples):
        if wi > 0 and s.total == 0:
            raise ValueError("positive weight on an empty dataset")
    scores = np.zeros(len(hyp_list))
    for i, (wi, s) in enumerate(zip(w, erm_samples)):
        if wi == 0 or s.total == 0:
            continue
        scores += wi * np.array([empirical_error(h, s) for h in hyp_list])
    return hyp_list[int(np.argmin(scores))]


class DatasetBank:
    """Count-based datasets tied to the cap vector.

    erm_counts[i] backs the persistent S_i; rwd_counts[i][t] backs the fresh
    S_{i,t}, reserved for the hedge update of iteration t and consumed exactly
    once.  Samples are never discarded.
    """

    def __init__(self, env: Environment, T: int, n_erm: int, n_rwd: int):
        self.env = env
        self.T = T
        self.n_erm = n_erm
        self.n_rwd = n_rwd
        k = env.k
        self.erm_counts = [np.zeros(d.size, dtype=np.int64) for d in env.dists]
        self.erm_sizes = np.zeros(k, dtype=np.int64)
        self.rwd_counts = [[None] * T for _ in range(k)]
        self.rwd_sizes = np.zeros((k, T), dtype=np.int64)
        self.rwd_consumed = np.zeros((k, T), dtype=bool)

    def top_up(self, cap: np.ndarray, t_from: int, rng: np.random.Generator):
        """One environment round bringing every dataset to its cap floor."""
        requests = []
        tags = []
        for i in range(self.env.k):
            need = math.ceil(cap[i] * self.n_erm) - int(self.erm_sizes[i])
            if need > 0:
                requests.append(SampleRequest.pure(i, need))
                tags.append(("erm", i, None))
        for i in range(self.env.k):
            target = math.ceil(cap[i] * self.n_rwd)
            for t in range(t_from, self.T):
                need = target - int(self.rwd_sizes[i, t])
                if need > 0:
                    requests.append(SampleRequest.pure(i, need))
                    tags.append(("rwd", i, t))
        if not requests:
            # The cap moved too little to change any ceil'd floor; the round
            # is still consumed, matching the cap-update accounting.
            requests.append(SampleRequest.pure(0, 0))
            tags.append(("erm", 0, None))
        samples = self.env.request_round(requests, rng)
        for (kind, i, t), sample in zip(tags, samples):
            counts = sample.parts[0].counts if sample.parts else 0
            n = sample.total
            if kind == "erm":
                if n > 0:
                    self.erm_counts[i] += counts
                self.erm_sizes[i] += n
            else:
                if self.rwd_counts[i][t] is None:
                    self.rwd_counts[i][t] = np.zeros(self.env.dists[i].size,
                                                     dtype=np.int64)
                if n > 0:
                    self.rwd_counts[i][t] += counts
                self.rwd_sizes[i, t] += n
        self._assert_floors(cap, t_from)

    def _assert_floors(self, cap, t_from):
        for i in range(self.env.k):
            assert self.erm_sizes[i] >= cap[i] * self.n_erm - 1e-9
            assert np.all(self.rwd_sizes[i, t_from:] >= cap[i] * self.n_rwd - 1e-9)

    def erm_samples(self) -> list:
        return [Sample([SamplePart(i, self.env.dists[i], self.erm_counts[i].copy())])
                for i in range(self.env.k)]

    def consume_reward_set(self, i: int, t: int):
        assert not self.rwd_consumed[i, t], "fresh dataset consumed twice"
        self.rwd_consumed[i, t] = True
        counts = self.rwd_counts[i][t]
        size = int(self.rwd_sizes[i, t])
        assert size > 0 and counts is not None, "fresh dataset missing at use time"
        return counts, size


def run_lazy_hedge_mdl(
    env: Environment,
    hypotheses,
    eps: float,
    C: float = 2.0,
    kind: str = BOX,
    rng: Optional[np.random.Generator] = None,
    constants: LazyMdlConstants = LazyMdlConstants(),
    compute_opt: bool = True,
):
    """Lazy-update hedge learner; returns (RandomizedClassifier, report).

    The report carries round and sample accounting, the exact randomized
    error per distribution, OPT over the class, the excess error, the culprit
    log (box region), and the hedge trajectory for regret certification.
    """
    if rng is None:
        raise ValueError("an rng is required")
    hyp_list = list(hypotheses)
    if not hyp_list:
        raise ValueError("empty hypothesis class")
    k = env.k
    d_proxy = class_dim_proxy(hyp_list)
    n_erm = math.ceil(constants.n_erm_coeff * (d_proxy + k)
                      * math.log(k / (eps * constants.delta)) / eps**2)
    n_rwd = math.ceil(constants.n_rwd_coeff * k)
    T = max(1, math.ceil(constants.c_T * math.log(k) / eps**2)) if k > 1 else 1
    eta = constants.c_eta * eps

    # Disagreement matrices: neq[i][h, x] = 1 iff hypothesis h mislabels x.
    neq = [np.stack([(h.predict(d.xs) != d.ys).astype(np.float64) for h in hyp_list])
           for d in env.dists]
    pop_err = np.stack([neq_i @ d.ps for neq_i, d in zip(neq, env.dists)], axis=1)

    bank = DatasetBank(env, T, n_erm, n_rwd)
    tracker = CapTracker(kind, k, C)
    rounds_before = env.ledger.rounds_used
    w = np.full(k, 1.0 / k)
    erm_errors = None  # (H, k), refreshed whenever S_i grows
    chosen = np.empty(T, dtype=np.int64)
    weights = np.empty((T, k))
    rewards = np.empty((T, k))
    for t in range(T):
        if tracker.observe(w, t):
            bank.top_up(tracker.cap, t, rng)
            erm_errors = np.stack(
                [neq_i @ counts / size for neq_i, counts, size
                 in zip(neq, bank.erm_counts, bank.erm_sizes)], axis=1)
        h_idx = int(np.argmin(erm_errors @ w))
        reward = np.empty(k)
        for i in range(k):
            counts, size = bank.consume_reward_set(i, t)
            reward[i] = float(neq[i][h_idx] @ counts) / size
        chosen[t] = h_idx
        weights[t] = w
        rewards[t] = reward
        w = hedge_step(w, reward, eta)

    assert env.ledger.rounds_used - rounds_before == tracker.rounds, (
        "every environment round must be a cap update")
    classifier = RandomizedClassifier(tuple(hyp_list[i] for i in chosen))
    per_dist = pop_err[chosen].mean(axis=0)
    max_err = float(per_dist.max())
    opt = float(pop_err.max(axis=1).min()) if compute_opt else float("nan")
    history = HedgeHistory(weights, rewards, eta)
    report = {
        "k": k,
        "d_proxy": d_proxy,
        "eps": eps,
        "C": C,
        "region": kind,
        "T": T,
        "rounds": tracker.rounds,
        "opt": opt,
        "max_err": max_err,
        "excess": max_err - opt,
        "per_dist_errors": [float(x) for x in per_dist],
        "n_erm": n_erm,
        "n_rwd": n_rwd,
        "culprit_counts": tracker.culprit_counts.copy(),
        "update_iterations": list(tracker.update_iterations),
        "cap": tracker.cap.copy(),
        "maxw": tracker.maxw.copy(),
        "history": history,
        **env.ledger.snapshot(),
    }
    return classifier, report
