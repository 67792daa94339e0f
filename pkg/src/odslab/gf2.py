"""Exact linear algebra over GF(2) with bit-packed vectors.

Vectors are stored packed into uint64 words, little-endian within each word
(bit j of a vector lives at word j >> 6, position j & 63).  Dimensions up to
MAX_DIM are supported; rank and elimination are vectorized over rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

MAX_DIM = 4096
# Full enumeration of the 2^d linear functionals is only attempted below this.
ENUMERATION_LIMIT = 14

_ONE = np.uint64(1)


class DimensionMismatch(ValueError):
    pass


class InconsistentExamples(ValueError):
    """Observed labels admit no linear functional."""


class InfeasibleDimensions(ValueError):
    pass


def n_words(d: int) -> int:
    return max(1, (d + 63) >> 6)


def _tail_mask(d: int) -> np.uint64:
    rem = d & 63
    if rem == 0:
        return np.uint64(0xFFFFFFFFFFFFFFFF)
    return np.uint64((1 << rem) - 1)


def pack_bits(bits) -> np.ndarray:
    """Pack a (..., d) array of 0/1 into (..., n_words(d)) uint64."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    n, d = bits.shape
    w = n_words(d)
    by = np.packbits(bits, axis=-1, bitorder="little")
    padded = np.zeros((n, w * 8), dtype=np.uint8)
    padded[:, : by.shape[1]] = by
    return np.ascontiguousarray(padded).view("<u8").reshape(n, w)


def unpack_bits(words: np.ndarray, d: int) -> np.ndarray:
    words = np.atleast_2d(words)
    by = np.ascontiguousarray(words).view(np.uint8)
    bits = np.unpackbits(by, axis=-1, bitorder="little")
    return bits[:, :d]


def parity(words: np.ndarray) -> np.ndarray:
    """Popcount parity along the last axis.

    Uses popcount(a) + popcount(b) == popcount(a ^ b) (mod 2) to fold the
    words before a single popcount.
    """
    folded = np.bitwise_xor.reduce(words, axis=-1)
    return (np.bitwise_count(folded) & 1).astype(np.uint8)


def random_words(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    w = n_words(d)
    out = np.frombuffer(rng.bytes(n * w * 8), dtype="<u8").reshape(n, w).copy()
    out[:, -1] &= _tail_mask(d)
    return out


@dataclass(frozen=True, eq=False)
class Gf2Vector:
    """Immutable bit vector of length d over GF(2)."""

    d: int
    words: np.ndarray

    def __post_init__(self):
        if not (1 <= self.d <= MAX_DIM):
            raise DimensionMismatch(f"dimension {self.d} outside [1, {MAX_DIM}]")
        w = np.asarray(self.words, dtype=np.uint64).reshape(n_words(self.d))
        w = w.copy()
        w[-1] &= _tail_mask(self.d)
        w.setflags(write=False)
        object.__setattr__(self, "words", w)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Gf2Vector":
        bits = np.asarray(list(bits), dtype=np.uint8)
        return cls(len(bits), pack_bits(bits)[0])

    @classmethod
    def zeros(cls, d: int) -> "Gf2Vector":
        return cls(d, np.zeros(n_words(d), dtype=np.uint64))

    @classmethod
    def random(cls, d: int, rng: np.random.Generator) -> "Gf2Vector":
        return cls(d, random_words(1, d, rng)[0])

    @classmethod
    def from_int(cls, d: int, value: int) -> "Gf2Vector":
        w = n_words(d)
        words = np.array(
            [(value >> (64 * i)) & 0xFFFFFFFFFFFFFFFF for i in range(w)],
            dtype=np.uint64,
        )
        return cls(d, words)

    @classmethod
    def from_hex(cls, d: int, s: str) -> "Gf2Vector":
        return cls.from_int(d, int(s, 16) if s else 0)

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.d)[0]

    def to_int(self) -> int:
        return sum(int(w) << (64 * i) for i, w in enumerate(self.words))

    def to_hex(self) -> str:
        return format(self.to_int(), "0{}x".format((self.d + 3) // 4))

    def bit(self, j: int) -> int:
        return int((self.words[j >> 6] >> np.uint64(j & 63)) & _ONE)

    def is_zero(self) -> bool:
        return not self.words.any()

    def __xor__(self, other: "Gf2Vector") -> "Gf2Vector":
        if self.d != other.d:
            raise DimensionMismatch("xor of vectors with different lengths")
        return Gf2Vector(self.d, self.words ^ other.words)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Gf2Vector)
            and self.d == other.d
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.d, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"Gf2Vector(d={self.d}, 0x{self.to_hex()})"


@dataclass(frozen=True, eq=False)
class LinearHypothesis:
    """Linear functional x -> <w, x> over GF(2)."""

    w: Gf2Vector

    @property
    def d(self) -> int:
        return self.w.d

    def predict(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized inner product with packed rows xs of shape (N, W)."""
        return parity(np.bitwise_and(np.atleast_2d(xs), self.w.words))

    def __call__(self, x: Gf2Vector) -> int:
        return eval_linear(self, x)

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearHypothesis) and self.w == other.w

    def __hash__(self) -> int:
        return hash(("lin", self.w))


def eval_linear(h: LinearHypothesis, x: Gf2Vector) -> int:
    if h.d != x.d:
        raise DimensionMismatch(f"hypothesis d={h.d} vs instance d={x.d}")
    return int(parity(np.bitwise_and(h.w.words, x.words)[None, :])[0])


class LinearClass:
    """The class of all 2^d linear functionals over GF(2)^d.

    Iterable only when d <= enumeration_limit; larger classes are handled by
    consistency solving (Gaussian elimination) in the learners.
    """

    def __init__(self, d: int, enumeration_limit: int = ENUMERATION_LIMIT):
        self.d = d
        self.enumeration_limit = enumeration_limit

    @property
    def enumerable(self) -> bool:
        return self.d <= self.enumeration_limit

    def __len__(self) -> int:
        return 1 << self.d

    def hypothesis(self, index: int) -> LinearHypothesis:
        return LinearHypothesis(Gf2Vector.from_int(self.d, index))

    def __iter__(self) -> Iterator[LinearHypothesis]:
        if not self.enumerable:
            raise ValueError(f"class of 2^{self.d} functionals is not enumerable")
        return (self.hypothesis(i) for i in range(len(self)))

    def __repr__(self) -> str:
        return f"LinearClass(d={self.d})"


# ---------------------------------------------------------------------------
# elimination
# ---------------------------------------------------------------------------

def _echelon(mat: np.ndarray, d: int, labels: Optional[np.ndarray] = None):
    """Reduced row-echelon form over GF(2), vectorized over rows.

    Returns (rows, pivots, row_labels, consistent).  Each pivot column is
    cleared in every other row; with labels, a zero row with label 1 marks an
    inconsistent system.
    """
    m = np.array(mat, dtype=np.uint64).reshape(-1, n_words(d)).copy()
    n = m.shape[0]
    lab = None if labels is None else np.asarray(labels, dtype=np.uint8).copy()
    pivots: list[int] = []
    r = 0
    for c in range(d):
        if r >= n:
            break
        wd, b = c >> 6, np.uint64(c & 63)
        col = (m[r:, wd] >> b) & _ONE
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
            if lab is not None:
                lab[[r, p]] = lab[[p, r]]
        others = np.nonzero((m[:, wd] >> b) & _ONE)[0]
        others = others[others != r]
        if others.size:
            m[others] ^= m[r]
            if lab is not None:
                lab[others] ^= lab[r]
        pivots.append(c)
        r += 1
    consistent = True
    if lab is not None and r < n:
        consistent = not bool(lab[r:].any())
    return m[:r], pivots, (None if lab is None else lab[:r]), consistent


def _as_matrix(vectors: Iterable[Gf2Vector]):
    vs = list(vectors)
    if not vs:
        return None, None
    d = vs[0].d
    for v in vs:
        if v.d != d:
            raise DimensionMismatch("vectors of mixed lengths")
    return np.stack([v.words for v in vs]), d


def rank(vectors: Iterable[Gf2Vector], d: Optional[int] = None) -> int:
    """dim(Span(vectors)); for an empty list d may be given (rank 0)."""
    mat, d_found = _as_matrix(vectors)
    if mat is None:
        return 0
    rows, _, _, _ = _echelon(mat, d_found)
    return rows.shape[0]


def rank_words(mat: np.ndarray, d: int) -> int:
    if mat.shape[0] == 0:
        return 0
    rows, _, _, _ = _echelon(mat, d)
    return rows.shape[0]


def _reduce_by(rows: np.ndarray, pivots: Sequence[int], v: np.ndarray, y: int = 0,
               ys: Optional[np.ndarray] = None):
    """Reduce v (and carried label) against echelon rows; returns (residual, label)."""
    v = v.copy()
    for i, p in enumerate(pivots):
        if (v[p >> 6] >> np.uint64(p & 63)) & _ONE:
            v ^= rows[i]
            if ys is not None:
                y ^= int(ys[i])
    return v, y


def solve_label(observed, query: Gf2Vector):
    """Label of `query` implied by linearly consistent labeled examples.

    Returns 0 or 1 when query is in the span of the observed instances, None
    otherwise.  Raises InconsistentExamples when no linear functional fits.
    """
    pairs = list(observed)
    d = query.d
    if not pairs:
        # Span of nothing is {0}, where every linear functional vanishes.
        return 0 if query.is_zero() else None
    mat, d_found = _as_matrix(v for v, _ in pairs)
    if d_found != d:
        raise DimensionMismatch("query length differs from observed instances")
    ys = np.array([y for _, y in pairs], dtype=np.uint8)
    rows, pivots, row_ys, consistent = _echelon(mat, d, ys)
    if not consistent:
        raise InconsistentExamples("observed examples fit no linear functional")
    res, y = _reduce_by(rows, pivots, query.words.copy(), 0, row_ys)
    return y if not res.any() else None


def _solve_from_echelon(rows: np.ndarray, pivots: Sequence[int], row_ys, d: int) -> np.ndarray:
    """Coefficients satisfying a reduced echelon system, free coordinates zero.

    In reduced form each row constrains only its own pivot, so w[pivot] = y.
    """
    w = np.zeros(n_words(d), dtype=np.uint64)
    for i, p in enumerate(pivots):
        if row_ys[i]:
            w[p >> 6] ^= _ONE << np.uint64(p & 63)
    return w


def solve_consistent_functional(mat: np.ndarray, ys: np.ndarray, d: int,
                                batch: int = 1024) -> LinearHypothesis:
    """A linear functional agreeing with every labeled row, free coordinates 0.

    Counterexample-driven: a candidate solved from the current basis is
    checked against all rows at once, and a strided batch of mismatching rows
    is folded into the basis, so large redundant samples cost a handful of
    vectorized passes.  Raises InconsistentExamples when no functional fits.
    """
    mat = np.asarray(mat, dtype=np.uint64).reshape(-1, n_words(d))
    ys = np.asarray(ys, dtype=np.uint8)
    basis = np.zeros((0, n_words(d)), dtype=np.uint64)
    pivots: list[int] = []
    basis_ys = np.zeros(0, dtype=np.uint8)
    w = np.zeros(n_words(d), dtype=np.uint64)
    while True:
        pred = parity(np.bitwise_and(mat, w))
        bad = np.nonzero(pred != ys)[0]
        if bad.size == 0:
            return LinearHypothesis(Gf2Vector(d, w))
        # Strided pick spreads the batch across structured supports; every
        # pass grows the basis rank or exposes an inconsistency.
        stride = max(1, bad.size // batch)
        pick = bad[::stride][:batch]
        stacked = np.concatenate([basis, mat[pick]])
        labels = np.concatenate([basis_ys, ys[pick]])
        basis, pivots, basis_ys, consistent = _echelon(stacked, d, labels)
        if not consistent:
            raise InconsistentExamples("sample fits no linear functional")
        w = _solve_from_echelon(basis, pivots, basis_ys, d)


# ---------------------------------------------------------------------------
# bases and subspaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Gf2Basis:
    """Row-echelon basis of a subspace of GF(2)^d."""

    d: int
    rows: tuple
    pivots: tuple

    @classmethod
    def from_vectors(cls, vectors: Sequence[Gf2Vector]) -> "Gf2Basis":
        mat, d = _as_matrix(vectors)
        if mat is None:
            raise ValueError("a basis needs at least one vector")
        rows, pivots, _, _ = _echelon(mat, d)
        if rows.shape[0] != len(vectors):
            raise ValueError("vectors are linearly dependent")
        return cls(d, tuple(Gf2Vector(d, r) for r in rows), tuple(pivots))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def row_matrix(self) -> np.ndarray:
        return np.stack([r.words for r in self.rows])

    def contains(self, v: Gf2Vector) -> bool:
        if v.d != self.d:
            raise DimensionMismatch("vector length differs from basis dimension")
        res, _ = _reduce_by(self.row_matrix(), self.pivots, v.words.copy())
        return not res.any()

    def enumerate_points(self) -> np.ndarray:
        """All 2^dim subspace points as packed rows; index bits select rows."""
        pts = np.zeros((1, n_words(self.d)), dtype=np.uint64)
        for r in self.rows:
            pts = np.concatenate([pts, pts ^ r.words])
        return pts

    def to_hex_rows(self) -> list[str]:
        return [r.to_hex() for r in self.rows]

    @classmethod
    def from_hex_rows(cls, d: int, rows: Sequence[str]) -> "Gf2Basis":
        return cls.from_vectors([Gf2Vector.from_hex(d, s) for s in rows])


def sample_independent_subspaces(
    d: int, dims: Sequence[int], rng: np.random.Generator, max_tries: int = 1000
) -> list[Gf2Basis]:
    """Uniformly random tuple of jointly independent subspaces of given dims.

    Each generator is drawn uniformly from GF(2)^d and rejected while it lies
    in the span of everything accepted so far, which yields the uniform
    distribution over valid tuples.
    """
    dims = [int(x) for x in dims]
    if any(x < 1 for x in dims):
        raise InfeasibleDimensions("subspace dimensions must be >= 1")
    total = sum(dims)
    if total > d:
        raise InfeasibleDimensions(f"sum(dims)={total} exceeds ambient dimension {d}")
    acc_rows = np.zeros((0, n_words(d)), dtype=np.uint64)
    acc_pivots: list[int] = []
    bases = []
    for dim in dims:
        gens = []
        for _ in range(dim):
            for _ in range(max_tries):
                v = random_words(1, d, rng)[0]
                res, _ = _reduce_by(acc_rows, acc_pivots, v)
                if res.any():
                    break
            else:
                raise RuntimeError("rejection sampling failed to find an independent vector")
            gens.append(Gf2Vector(d, v))
            # Insert the reduced residual, keeping pivots sorted for reduction.
            p = _lowest_set_bit(res)
            pos = int(np.searchsorted(np.array(acc_pivots), p))
            acc_rows = np.insert(acc_rows, pos, res, axis=0)
            acc_pivots.insert(pos, p)
        bases.append(Gf2Basis.from_vectors(gens))
    got = rank_words(np.concatenate([b.row_matrix() for b in bases]), d)
    assert got == total, "sampled subspaces are not jointly independent"
    return bases


def _lowest_set_bit(words: np.ndarray) -> int:
    for i, w in enumerate(words):
        w = int(w)
        if w:
            return 64 * i + (w & -w).bit_length() - 1
    raise ValueError("zero vector has no set bit")
