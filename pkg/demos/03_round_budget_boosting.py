"""Boosted learning under a fixed round budget r.

One batch per boosting round: a mixture sample for the learner plus fresh
per-task test draws that drive the multiplicative reweighting.  More rounds
buy smaller per-round samples; the printout shows the measured totals and the
exact worst-task error of the majority vote.
"""
import numpy as np

from odslab.env import Environment
from odslab.gf2 import LinearClass
from odslab.instances import (build_difficulty_spec, default_ambient_dim,
                              gen_planted_mdl)
from odslab.realizable import run_tradeoff_mdl, tradeoff_params

k, d0, eps, delta = 8, 16, 0.1, 0.1
spec = build_difficulty_spec(k, 3, d0)
d = default_ambient_dim(d0, k)

print(f"k={k}, d={d}, eps={eps}, delta={delta}")
print(f"{'r':>2} {'theta':>6} {'p':>10} {'m (mixture)':>12} {'n (test)':>9} "
      f"{'total draws':>12} {'worst error':>11}")
for r in (1, 2, 3):
    rng = np.random.default_rng(30 + r)
    inst = gen_planted_mdl(d, spec, rng)
    env = Environment(inst.dists)
    params = tradeoff_params(k, r, eps, delta, d=d)
    ens, rep = run_tradeoff_mdl(env, LinearClass(d), r=r, eps=eps, delta=delta,
                                rng=rng)
    assert rep["rounds_used"] == r
    print(f"{r:>2} {params.theta:>6.3f} {params.p:>10.3e} {params.m:>12,} "
          f"{params.n:>9,} {rep['samples_total']:>12,} "
          f"{rep['max_pop_error']:>11.4f}")

print("\nNote the r=2 -> r=3 totals: the per-round sample size barely shrinks")
print("once the boosting base 4*k^(2/r) is dominated by its constant, so at")
print("k=8 three rounds draw more in total than two.")
