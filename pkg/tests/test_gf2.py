import numpy as np
import pytest

from odslab import gf2
from odslab.gf2 import (Gf2Basis, Gf2Vector, LinearClass, LinearHypothesis,
                        eval_linear, rank, sample_independent_subspaces,
                        solve_label, solve_consistent_functional)

from brute import brute_rank, brute_solve, dot2


def vec(bits):
    return Gf2Vector.from_bits(bits)


def test_rank_trivial_cases():
    assert rank([], d=3) == 0
    assert rank([vec([1, 0, 0]), vec([0, 1, 0]), vec([1, 1, 0])]) == 2
    assert rank([vec([0, 0, 0])]) == 0


def test_rank_matches_brute_force_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        d = int(rng.integers(2, 11))
        ints = [int(x) for x in rng.integers(0, 1 << d, size=int(rng.integers(0, 16)))]
        vs = [Gf2Vector.from_int(d, v) for v in ints]
        assert rank(vs, d=d) == brute_rank(ints)


def test_rank_50_random_d10_against_span_enumeration():
    rng = np.random.default_rng(12)
    ints = [int(x) for x in rng.integers(0, 1 << 10, size=50)]
    assert rank([Gf2Vector.from_int(10, v) for v in ints]) == brute_rank(ints)


def test_rank_unchanged_by_span_members():
    rng = np.random.default_rng(13)
    for _ in range(50):
        d = int(rng.integers(3, 12))
        n = int(rng.integers(1, 8))
        vs = [Gf2Vector.random(d, rng) for _ in range(n)]
        r0 = rank(vs)
        # random combination of the existing vectors lies in the span
        mask = rng.integers(0, 2, size=n)
        combo = Gf2Vector.zeros(d)
        for m, v in zip(mask, vs):
            if m:
                combo = combo ^ v
        assert rank(vs + [combo]) == r0


def test_rank_mismatched_lengths():
    with pytest.raises(gf2.DimensionMismatch):
        rank([vec([1, 0]), vec([1, 0, 0])])


def test_solve_label_examples():
    a, b = vec([1, 0, 0]), vec([0, 1, 0])
    assert solve_label([(a, 1), (b, 0)], a ^ b) == 1
    assert solve_label([(a, 1)], b) is None
    assert solve_label([(a, 1)], Gf2Vector.zeros(3)) == 0
    assert solve_label([], Gf2Vector.zeros(3)) == 0
    assert solve_label([], a) is None


def test_solve_label_inconsistent_raises():
    a = vec([1, 0, 0])
    with pytest.raises(gf2.InconsistentExamples):
        solve_label([(a, 1), (a, 0)], a)


def test_solve_label_planted_functional_fully_determined():
    rng = np.random.default_rng(14)
    d = 8
    hstar = LinearHypothesis(Gf2Vector.random(d, rng))
    basis = [Gf2Vector.from_int(d, 1 << j) for j in range(d)]
    observed = [(v, eval_linear(hstar, v)) for v in basis]
    for _ in range(30):
        q = Gf2Vector.random(d, rng)
        assert solve_label(observed, q) == eval_linear(hstar, q)


def test_solve_label_matches_brute_enumeration():
    rng = np.random.default_rng(15)
    for _ in range(150):
        d = int(rng.integers(2, 9))
        wstar = int(rng.integers(0, 1 << d))
        xs = [int(x) for x in rng.integers(0, 1 << d, size=int(rng.integers(0, 10)))]
        observed_int = [(x, dot2(wstar, x)) for x in xs]
        observed = [(Gf2Vector.from_int(d, x), y) for x, y in observed_int]
        q = int(rng.integers(0, 1 << d))
        assert solve_label(observed, Gf2Vector.from_int(d, q)) == \
            brute_solve(observed_int, q, d)


def test_determined_iff_rank_unchanged():
    rng = np.random.default_rng(16)
    for _ in range(80):
        d = int(rng.integers(2, 10))
        wstar = int(rng.integers(0, 1 << d))
        xs = [int(x) for x in rng.integers(0, 1 << d, size=int(rng.integers(1, 8)))]
        observed = [(Gf2Vector.from_int(d, x), dot2(wstar, x)) for x in xs]
        q = Gf2Vector.from_int(d, int(rng.integers(0, 1 << d)))
        vs = [v for v, _ in observed]
        determined = solve_label(observed, q) is not None
        assert determined == (rank(vs + [q]) == rank(vs))


def test_eval_linear_examples():
    h = LinearHypothesis(vec([1, 1, 0]))
    assert eval_linear(h, vec([1, 0, 0])) == 1
    assert eval_linear(h, vec([1, 1, 0])) == 0
    zero = LinearHypothesis(Gf2Vector.zeros(3))
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert eval_linear(zero, Gf2Vector.random(3, rng)) == 0
    with pytest.raises(gf2.DimensionMismatch):
        eval_linear(h, vec([1, 0]))


def test_subspace_sampling_postconditions():
    rng = np.random.default_rng(17)
    bases = sample_independent_subspaces(8, [2, 3], rng)
    assert [b.dim for b in bases] == [2, 3]
    union = np.concatenate([b.row_matrix() for b in bases])
    assert gf2.rank_words(union, 8) == 5
    # full space
    full = sample_independent_subspaces(4, [4], rng)[0]
    assert full.dim == 4
    assert full.enumerate_points().shape == (16, 1)
    with pytest.raises(gf2.InfeasibleDimensions):
        sample_independent_subspaces(4, [3, 2], rng)


def test_subspace_sampling_rank_every_draw():
    rng = np.random.default_rng(18)
    for _ in range(40):
        d = int(rng.integers(6, 20))
        dims = [int(rng.integers(1, 4)) for _ in range(int(rng.integers(1, 4)))]
        if sum(dims) > d:
            continue
        bases = sample_independent_subspaces(d, dims, rng)
        union = np.concatenate([b.row_matrix() for b in bases])
        assert gf2.rank_words(union, d) == sum(dims)


def test_one_dim_generator_uniform_over_nonzero_vectors():
    # d=6, dims=[1,1]: the first generator is uniform over the 63 nonzero
    # vectors; every cell within 3 sigma of the binomial mean on 10,000 draws.
    rng = np.random.default_rng(19)
    draws = 10_000
    counts = np.zeros(64, dtype=np.int64)
    for _ in range(draws):
        b = sample_independent_subspaces(6, [1, 1], rng)[0]
        counts[b.rows[0].to_int()] += 1
    assert counts[0] == 0
    p = 1.0 / 63
    sigma = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts[1:] - draws * p) <= 3 * sigma)


def test_pack_unpack_hex_roundtrip():
    rng = np.random.default_rng(20)
    for d in (1, 5, 63, 64, 65, 130):
        v = Gf2Vector.random(d, rng)
        assert Gf2Vector.from_bits(v.to_bits()) == v
        assert Gf2Vector.from_hex(d, v.to_hex()) == v
        assert Gf2Vector.from_int(d, v.to_int()) == v
    a, b = vec([1, 1, 0]), vec([0, 1, 1])
    assert (a ^ b) == vec([1, 0, 1])


def test_consistent_functional_solver():
    rng = np.random.default_rng(21)
    for d in (5, 40, 67, 130):
        hstar = LinearHypothesis(Gf2Vector.random(d, rng))
        xs = gf2.random_words(300, d, rng)
        ys = hstar.predict(xs)
        h = solve_consistent_functional(xs, ys, d)
        assert np.array_equal(h.predict(xs), ys)
    # inconsistent system: same instance, contradictory labels
    x = gf2.random_words(1, 8, rng)
    both = np.concatenate([x, x])
    with pytest.raises(gf2.InconsistentExamples):
        solve_consistent_functional(both, np.array([0, 1], dtype=np.uint8), 8)


def test_basis_membership_and_enumeration():
    rng = np.random.default_rng(22)
    basis = sample_independent_subspaces(10, [3], rng)[0]
    pts = basis.enumerate_points()
    assert pts.shape[0] == 8
    assert len({int(p[0]) for p in pts}) == 8
    for p in pts:
        assert basis.contains(Gf2Vector(10, p))
    with pytest.raises(ValueError):
        Gf2Basis.from_vectors([vec([1, 0]), vec([1, 0])])
    hexes = basis.to_hex_rows()
    again = Gf2Basis.from_hex_rows(10, hexes)
    assert {int(p[0]) for p in again.enumerate_points()} == {int(p[0]) for p in pts}


def test_linear_class_enumeration():
    cls = LinearClass(3)
    assert len(cls) == 8 and cls.enumerable
    hyps = list(cls)
    assert len({h.w.to_int() for h in hyps}) == 8
    big = LinearClass(40)
    assert not big.enumerable
    with pytest.raises(ValueError):
        list(big)
