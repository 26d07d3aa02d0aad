"""Exact arithmetic over F_p: scalars, vectors, affine maps, seeded RNG.

Index convention used for every truth table in the package: the vector
x in F_p^n maps to the integer sum_i |x_i| * p^(i-1), i.e. coordinate 1 is
the least significant digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

SUPPORTED_PRIMES = (2, 3, 5, 7)


def validate_prime(p: int) -> int:
    if p not in SUPPORTED_PRIMES:
        raise ValidationError(
            f"unsupported modulus {p}; supported primes are {SUPPORTED_PRIMES}",
            code="validation.prime")
    return p


@dataclass(frozen=True)
class FieldScalar:
    """An element of F_p, stored as a reduced representative in [0, p)."""

    value: int
    p: int

    def __post_init__(self):
        validate_prime(self.p)
        if not 0 <= self.value < self.p:
            raise ValidationError(
                f"scalar {self.value} out of range for F_{self.p}",
                code="validation.scalar")

    def _check(self, other: "FieldScalar"):
        if self.p != other.p:
            raise ValidationError("modulus mismatch", code="validation.modulus")

    def __add__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return FieldScalar((self.value + other.value) % self.p, self.p)

    def __sub__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return FieldScalar((self.value - other.value) % self.p, self.p)

    def __mul__(self, other: "FieldScalar | int") -> "FieldScalar":
        if isinstance(other, FieldScalar):
            self._check(other)
            other = other.value
        return FieldScalar((self.value * other) % self.p, self.p)

    def __neg__(self) -> "FieldScalar":
        return FieldScalar((-self.value) % self.p, self.p)


@dataclass(frozen=True)
class FieldVector:
    """A vector in F_p^n with immutable integer coordinates."""

    p: int
    coords: tuple[int, ...]

    def __post_init__(self):
        validate_prime(self.p)
        coords = tuple(int(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if any(not 0 <= c < self.p for c in coords):
            raise ValidationError(
                f"coordinates {coords} out of range for F_{self.p}",
                code="validation.vector")

    @property
    def n(self) -> int:
        return len(self.coords)

    def __add__(self, other: "FieldVector") -> "FieldVector":
        if self.p != other.p or self.n != other.n:
            raise ValidationError("vector shape or modulus mismatch",
                                  code="validation.vector")
        return FieldVector(self.p, tuple((a + b) % self.p
                                         for a, b in zip(self.coords, other.coords)))

    def __mul__(self, scalar: int) -> "FieldVector":
        return FieldVector(self.p, tuple((scalar * c) % self.p for c in self.coords))

    __rmul__ = __mul__

    def to_index(self) -> int:
        return digits_to_index(self.p, self.coords)

    @classmethod
    def from_index(cls, p: int, n: int, index: int) -> "FieldVector":
        return cls(p, index_to_digits(p, n, index))

    @classmethod
    def zero(cls, p: int, n: int) -> "FieldVector":
        return cls(p, (0,) * n)

    @classmethod
    def basis(cls, p: int, n: int, i: int) -> "FieldVector":
        """Standard basis vector e_i, 1-based."""
        return cls(p, tuple(1 if j == i - 1 else 0 for j in range(n)))


# ---------------------------------------------------------------------------
# Index <-> digit utilities (vectorized).  Digit column j is coordinate j+1.

def digits_to_index(p: int, digits: Sequence[int]) -> int:
    idx = 0
    for d in reversed(digits):
        idx = idx * p + int(d)
    return idx


def index_to_digits(p: int, n: int, index: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        out.append(index % p)
        index //= p
    return tuple(out)


def digit_matrix(p: int, n: int) -> np.ndarray:
    """All p^n points as an (p^n, n) array of digits, row i = point index i."""
    return _digit_matrix_cached(p, n).copy()


@lru_cache(maxsize=32)
def _digit_matrix_cached(p: int, n: int) -> np.ndarray:
    idx = np.arange(p ** n, dtype=np.int64)
    cols = [(idx // p ** i) % p for i in range(n)]
    mat = np.stack(cols, axis=1).astype(np.int8) if n else np.zeros((1, 0), np.int8)
    mat.setflags(write=False)
    return mat


def indices_from_digit_array(p: int, digits: np.ndarray) -> np.ndarray:
    """Inverse of digit_matrix for an (..., n) digit array."""
    n = digits.shape[-1]
    weights = p ** np.arange(n, dtype=np.int64)
    return (digits.astype(np.int64) @ weights)


def add_indices(p: int, n: int, a, b):
    """Index of x + y for index arrays (or ints) a, b."""
    if p == 2:
        return np.bitwise_xor(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else a ^ b
    da = _digit_matrix_cached(p, n)[a]
    db = _digit_matrix_cached(p, n)[b]
    return indices_from_digit_array(p, (da.astype(np.int16) + db) % p)


def scale_indices(p: int, n: int, scalar: int, a):
    """Index of scalar * x for an index array (or int) a."""
    scalar %= p
    if scalar == 1:
        return a
    if scalar == 0:
        return np.zeros_like(a) if isinstance(a, np.ndarray) else 0
    da = _digit_matrix_cached(p, n)[a]
    return indices_from_digit_array(p, (scalar * da.astype(np.int16)) % p)


@lru_cache(maxsize=8)
def addition_table(p: int, n: int) -> np.ndarray:
    """Table T with T[h, x] = index of x + h; only built for p^n <= 4096."""
    size = p ** n
    if size > 4096:
        raise ValidationError(f"addition table too large for p^n = {size}",
                              code="validation.size")
    d = _digit_matrix_cached(p, n).astype(np.int16)
    s = (d[:, None, :] + d[None, :, :]) % p
    table = indices_from_digit_array(p, s).astype(np.int32)
    table.setflags(write=False)
    return table


# ---------------------------------------------------------------------------
# Linear forms and affine maps.

def eval_linear_form(coeffs: Sequence[int], xs: Sequence[FieldVector]) -> FieldVector:
    """Apply the form (c_1, ..., c_l) to vectors x_1, ..., x_l: sum c_j x_j."""
    if len(coeffs) != len(xs):
        raise ValidationError("form length does not match number of vectors",
                              code="validation.form")
    if not xs:
        raise ValidationError("empty vector tuple", code="validation.form")
    p, n = xs[0].p, xs[0].n
    for x in xs:
        if x.p != p or x.n != n:
            raise ValidationError("vectors disagree on modulus or dimension",
                                  code="validation.form")
    acc = [0] * n
    for c, x in zip(coeffs, xs):
        c = int(c) % p
        for i, xi in enumerate(x.coords):
            acc[i] = (acc[i] + c * xi) % p
    return FieldVector(p, tuple(acc))


@dataclass(frozen=True)
class AffineMap:
    """x |-> Lx + c from F_p^k to F_p^n; matrix is n x k, shift has length n."""

    p: int
    matrix: tuple[tuple[int, ...], ...]
    shift: FieldVector

    def __post_init__(self):
        validate_prime(self.p)
        rows = tuple(tuple(int(v) % self.p for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        if self.shift.p != self.p or len(rows) != self.shift.n:
            raise ValidationError("affine map shape mismatch",
                                  code="validation.affine")
        k = len(rows[0]) if rows else 0
        if any(len(r) != k for r in rows):
            raise ValidationError("ragged matrix", code="validation.affine")

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def k(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def apply(self, x: FieldVector) -> FieldVector:
        if x.p != self.p or x.n != self.k:
            raise ValidationError("argument shape mismatch", code="validation.affine")
        out = list(self.shift.coords)
        for i, row in enumerate(self.matrix):
            out[i] = (out[i] + sum(r * c for r, c in zip(row, x.coords))) % self.p
        return FieldVector(self.p, tuple(out))

    def apply_indices(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized apply for an array of point indices in F_p^k."""
        d = _digit_matrix_cached(self.p, self.k)[indices].astype(np.int64)
        mat = np.array(self.matrix, dtype=np.int64).T  # (k, n)
        out = (d @ mat + np.array(self.shift.coords, dtype=np.int64)) % self.p
        return indices_from_digit_array(self.p, out)


# ---------------------------------------------------------------------------
# Seeded, splittable randomness.

@dataclass(frozen=True)
class RandomSeed:
    """Deterministic seed with an explicit split path.

    The same seed and the same sequence of split()/generator() calls give
    bit-identical streams; there is no hidden global state.
    """

    seed: int
    path: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer",
                                  code="validation.seed")

    def split(self, index: int) -> "RandomSeed":
        return RandomSeed(self.seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


def as_seed(seed: "RandomSeed | int") -> RandomSeed:
    return seed if isinstance(seed, RandomSeed) else RandomSeed(int(seed))


def random_affine_map(k: int, n: int, p: int, seed: "RandomSeed | int") -> AffineMap:
    """Uniform affine map F_p^k -> F_p^n.

    Uniform over all n x k linear parts (rank-deficient ones included) and
    all shifts; that exact distribution is what makes tuples (A L_1, ..., A L_m)
    for affine forms match the independent-points distribution.
    """
    validate_prime(p)
    if k < 1 or n < 1:
        raise ValidationError("dimensions must be >= 1", code="validation.affine")
    rng = as_seed(seed).generator()
    matrix = rng.integers(0, p, size=(n, k))
    shift = rng.integers(0, p, size=n)
    return AffineMap(p, tuple(tuple(int(v) for v in row) for row in matrix),
                     FieldVector(p, tuple(int(v) for v in shift)))
