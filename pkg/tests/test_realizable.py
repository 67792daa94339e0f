import math

import numpy as np
import pytest

from odslab.env import (ConstPredictor, Environment, FiniteDistribution,
                        Sample, SamplePart, TablePredictor)
from odslab.gf2 import Gf2Vector, LinearClass, LinearHypothesis
from odslab.instances import (build_difficulty_spec, default_ambient_dim,
                              gen_planted_mdl)
from odslab.realizable import (Ensemble, ParameterError,
                               check_majority_margin_bound, majority_predict,
                               pac_learn, run_tradeoff_mdl, tradeoff_params)


def test_params_frozen_values_k16_r4():
    p = tradeoff_params(16, 4, 0.1, 0.1, d=32)
    assert p.theta == pytest.approx(0.5)
    assert p.p == pytest.approx(1 / 512)
    assert p.alpha == pytest.approx(0.5 * math.log(511), abs=1e-12)
    assert p.alpha == pytest.approx(3.118, abs=5e-4)
    assert p.tau == pytest.approx(0.1 / 3)


def test_params_frozen_values_k4_r2():
    p = tradeoff_params(4, 2, 0.1, 0.1, d=8)
    assert p.theta == pytest.approx(0.5)
    assert p.p == pytest.approx(1 / 512)


def test_params_test_size_formula():
    # tau = 0.1 needs eps = 0.3 at theta = 1/2; n = ceil(120 ln 160) = 610
    p = tradeoff_params(4, 2, 0.3, 0.1, d=8)
    assert p.tau == pytest.approx(0.1)
    assert p.n == math.ceil((12 / p.tau) * math.log(2 * 2 * 4 / 0.1)) == 610


def test_params_validation():
    with pytest.raises(ParameterError):
        tradeoff_params(4, 3, 0.1, 0.1, d=8)  # r > log2(k)
    with pytest.raises(ParameterError):
        tradeoff_params(4, 2, 0.6, 0.1, d=8)
    assert tradeoff_params(2, 1, 0.1, 0.1, d=8).p < 0.5
    tradeoff_params(8, 1, 0.1, 0.1, d=8)  # r=1 baseline is allowed


def _unit_sample(pairs):
    xs = np.array([x for x, _ in pairs], dtype=np.int64)
    ys = np.array([y for _, y in pairs], dtype=np.uint8)
    dist = FiniteDistribution(xs, ys, np.full(len(pairs), 1 / len(pairs)),
                              validate=False)
    return Sample([SamplePart(0, dist, np.ones(len(pairs), dtype=np.int64))])


def test_pac_learn_erm_and_ties():
    sample = _unit_sample([(0, 0), (1, 1), (2, 1)])
    h_bad = TablePredictor((1, 0, 0))  # wrong everywhere
    h_good = TablePredictor((0, 1, 1))
    assert pac_learn(sample, [h_bad, h_good]) is h_good
    # errors 0.2 apart pick the smaller one; exact ties pick the first index
    a = TablePredictor((0, 1, 0))
    b = TablePredictor((0, 0, 1))
    assert pac_learn(sample, [a, b]) is a
    with pytest.raises(ValueError):
        pac_learn(sample, [])


def test_pac_learn_bagging_b1_equals_erm_on_one_bootstrap():
    from odslab.realizable import _bootstrap

    sample = _unit_sample([(0, 0), (1, 1), (2, 1), (3, 0)])
    hyps = [TablePredictor(tuple(int(b) for b in bits))
            for bits in np.ndindex(2, 2, 2, 2)]
    bag = pac_learn(sample, hyps, rng=np.random.default_rng(99), mode="bagging",
                    bags=1)
    manual = pac_learn(_bootstrap(sample, np.random.default_rng(99)), hyps)
    assert isinstance(bag, Ensemble) and len(bag.members) == 1
    assert bag.members[0] is manual


def test_pac_learn_consistency_path_matches_truth_on_span():
    rng = np.random.default_rng(60)
    d = 30
    hstar = LinearHypothesis(Gf2Vector.random(d, rng))
    from odslab.gf2 import random_words

    xs = random_words(100, d, rng)
    ys = hstar.predict(xs)
    dist = FiniteDistribution(xs, ys, np.full(100, 0.01), validate=False)
    sample = Sample([SamplePart(0, dist, np.ones(100, dtype=np.int64))])
    h = pac_learn(sample, LinearClass(d))
    assert np.array_equal(h.predict(xs), ys)


def test_majority_predict_examples():
    votes = lambda bits: Ensemble(tuple(ConstPredictor(b) for b in bits))
    assert majority_predict(votes((1, 1, 0)), 0) == 1
    assert majority_predict(votes((0, 1)), 0) == 1  # tie goes to 1
    assert majority_predict(votes((0, 0, 1)), 0) == 0
    with pytest.raises(ValueError):
        majority_predict(Ensemble(()), 0)


def _planted(k=4, r_levels=2, d0=8, seed=0):
    rng = np.random.default_rng(seed)
    spec = build_difficulty_spec(k, r_levels, d0)
    d = default_ambient_dim(d0, k)
    inst = gen_planted_mdl(d, spec, rng)
    return inst, Environment(inst.dists), rng


def test_run_consumes_exactly_r_rounds_and_ledger_total():
    inst, env, rng = _planted(seed=61)
    ens, rep = run_tradeoff_mdl(env, LinearClass(inst.d), r=2, eps=0.1,
                                delta=0.1, rng=rng)
    p = rep["params"]
    assert rep["rounds_used"] == 2
    assert rep["samples_total"] == 2 * (p.m + 4 * p.n)
    assert len(ens.members) == 2
    # every recorded mixture is a valid simplex vector
    wh = rep["weight_history"]
    assert np.all(wh >= 0) and np.allclose(wh.sum(axis=1), 1.0, atol=1e-9)


def test_run_singleton_class_returns_truth():
    inst, env, rng = _planted(seed=62)
    ens, rep = run_tradeoff_mdl(env, [inst.hstar], r=2, eps=0.1, delta=0.1,
                                rng=rng)
    assert rep["max_pop_error"] == 0.0
    assert all(h is inst.hstar for h in ens.members)
    assert rep["success"]


def test_run_small_planted_success_and_r1_baseline():
    inst, env, rng = _planted(k=8, r_levels=3, d0=8, seed=63)
    ens, rep = run_tradeoff_mdl(env, LinearClass(inst.d), r=3, eps=0.1,
                                delta=0.1, rng=rng)
    assert rep["success"] and rep["max_pop_error"] <= 0.1
    inst, env, rng = _planted(k=8, r_levels=3, d0=8, seed=64)
    ens, rep = run_tradeoff_mdl(env, LinearClass(inst.d), r=1, eps=0.1,
                                delta=0.1, rng=rng)
    assert rep["rounds_used"] == 1
    assert len(ens.members) == 1


def test_weight_update_direction():
    # a fixed predictor that errs badly on task 1 only: after each round the
    # mixture must tilt toward task 1 by the e^{2 alpha} odds-ratio factor
    d_good = FiniteDistribution(np.array([0, 1]), np.array([0, 0]),
                                np.array([0.5, 0.5]))
    d_bad = FiniteDistribution(np.array([0, 1]), np.array([1, 1]),
                               np.array([0.5, 0.5]))
    env = Environment([d_good, d_bad])
    rng = np.random.default_rng(65)
    ens, rep = run_tradeoff_mdl(env, [ConstPredictor(0)], r=1, eps=0.1,
                                delta=0.1, rng=rng)
    p = rep["params"]
    q = rep["weight_history"][-1]
    assert q[1] > q[0]
    expected_ratio = math.exp(2 * p.alpha)
    assert q[1] / q[0] == pytest.approx(expected_ratio)
    assert rep["per_dist_errors"] == [0.0, 1.0]
    assert not rep["success"]


def test_margin_bound_identical_hypotheses():
    dist = FiniteDistribution(np.arange(10), np.zeros(10, dtype=np.uint8),
                              np.full(10, 0.1))
    # three copies of a predictor with error 0.1 = tau/2
    h = TablePredictor((1, 0, 0, 0, 0, 0, 0, 0, 0, 0))
    premise, err, bound = check_majority_margin_bound(
        [h, h, h], [1.0, 1.0, 1.0], dist, tau=0.2, theta=0.5)
    assert premise and err == pytest.approx(0.1) and bound == pytest.approx(0.6)
    assert err <= bound


def test_margin_bound_vacuous_when_premise_fails():
    dist = FiniteDistribution(np.arange(4), np.zeros(4, dtype=np.uint8),
                              np.full(4, 0.25))
    bad = TablePredictor((1, 1, 1, 1))
    premise, err, bound = check_majority_margin_bound(
        [bad, bad], [1.0, 1.0], dist, tau=0.1, theta=0.5)
    assert not premise
    assert err == pytest.approx(1.0)  # no assertion was made


def test_margin_bound_weight_validation():
    dist = FiniteDistribution(np.arange(2), np.zeros(2, dtype=np.uint8),
                              np.full(2, 0.5))
    h = ConstPredictor(0)
    with pytest.raises(ValueError):
        check_majority_margin_bound([h], [-1.0], dist, 0.1, 0.5)
