"""Planted multi-distribution instances and their difficulty ladder.

The difficulty of a task is the dimension of its hidden subspace: learning a
task needs about that many samples.  Dimensions follow a geometric ladder so
that every level contributes the same expected total work.
"""
import numpy as np

from odslab.env import Environment, population_error
from odslab.instances import (build_difficulty_spec, default_ambient_dim,
                              gen_planted_mdl)

rng = np.random.default_rng(2)

spec = build_difficulty_spec(k=8, r=3, d0=16)
print("difficulty ladder (value, mass):", spec.levels)
print("masses sum to", spec.masses().sum(), " mean difficulty", spec.mean)

d = default_ambient_dim(16, 8)
print("\nambient dimension d =", d)
inst = gen_planted_mdl(d, spec, rng)
print("drawn difficulties:", inst.diffs, f"(rejections: {inst.rejections})")
print("support sizes:", [dist.size for dist in inst.dists])
print("hidden functional achieves error",
      max(population_error(inst.hstar, dist) for dist in inst.dists),
      "on every task (realizable)")

env = Environment(inst.dists)
print("\nenvironment ready:", env.k, "tasks, ledger:", env.ledger.snapshot())

print("\nserialized instance (truncated):", inst.to_json()[:120], "...")

levels = spec.sample(rng, 2000)
print("\nempirical ladder frequencies over 2000 draws:")
for value, mass in spec.levels:
    print(f"  diff={value:3d}: expected {mass:.3f}, got {np.mean(levels == value):.3f}")
