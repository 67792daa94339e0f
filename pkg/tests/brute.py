"""Independent brute-force oracles used to freeze expected test values.

These deliberately avoid the package's packed-word elimination: ranks come
from exhaustive span enumeration and labels from enumerating every linear
functional, so they cross-check the fast paths.
"""
import numpy as np


def span_of(ints):
    span = {0}
    for v in ints:
        v = int(v)
        if v not in span:
            span |= {s ^ v for s in span}
    return span


def brute_rank(ints):
    return int(np.log2(len(span_of(ints))).round())


def dot2(a, b):
    return bin(a & b).count("1") & 1


def brute_solve(observed, query, d):
    """All-functional enumeration; None when consistent functionals disagree,
    'inconsistent' when none fits."""
    consistent = [w for w in range(1 << d)
                  if all(dot2(w, x) == y for x, y in observed)]
    if not consistent:
        return "inconsistent"
    labels = {dot2(w, query) for w in consistent}
    return labels.pop() if len(labels) == 1 else None


def brute_minimax(hypotheses, dists, population_error):
    return min(max(population_error(h, dist) for dist in dists)
               for h in hypotheses)
