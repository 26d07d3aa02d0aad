"""Torus-valued polynomials on F_p^n in canonical monomial form.

A polynomial is a finite sum of terms c * |x_1|^d_1 ... |x_n|^d_n / p^(k+1)
mod 1 with 0 <= d_i < p and 1 <= c < p, with no constant term.  This
representation is unique, which makes structural degree and depth well
defined:

    degree = max over terms of (sum_i d_i + k (p - 1))
    depth  = max over terms of k

Value tables (TorusFunction) store one numerator per point over a shared
denominator p^(k+1); all arithmetic on them is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .field import (FieldVector, add_indices, digit_matrix, validate_prime)
from .runtime import DEFAULT_WORK_CEILING, check_work
from .torus import TorusValue

MonomialKey = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class Monomial:
    """One canonical term: exponent vector, depth index k, coefficient c."""

    exps: tuple[int, ...]
    k: int
    c: int

    @property
    def structural_degree(self) -> int:
        # p is not stored here; TorusPolynomial computes k*(p-1) itself.
        return sum(self.exps)


class TorusPolynomial:
    """Polynomial F_p^n -> R/Z in the unique monomial representation."""

    def __init__(self, p: int, n: int, terms: Mapping[MonomialKey, int] | Iterable):
        validate_prime(p)
        if n < 0:
            raise ValidationError("negative arity", code="validation.poly")
        self.p = p
        self.n = n
        if not isinstance(terms, Mapping):
            terms = {(tuple(e), int(k)): int(c) for e, k, c in terms}
        self.terms = _normalize(p, n, terms)

    # -- structure ----------------------------------------------------------

    @property
    def degree(self) -> int:
        """Structural degree; 0 for the zero polynomial."""
        if not self.terms:
            return 0
        return max(sum(e) + k * (self.p - 1) for (e, k) in self.terms)

    @property
    def depth(self) -> int:
        """Structural depth; 0 for the zero polynomial."""
        if not self.terms:
            return 0
        return max(k for (_, k) in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_classical(self) -> bool:
        return all(k == 0 for (_, k) in self.terms)

    def monomials(self) -> list[Monomial]:
        return [Monomial(e, k, c) for (e, k), c in sorted(self.terms.items())]

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x: "FieldVector | Sequence[int]") -> TorusValue:
        if isinstance(x, FieldVector):
            if x.p != self.p or x.n != self.n:
                raise ValidationError("arity or modulus mismatch",
                                      code="validation.poly")
            coords = x.coords
        else:
            coords = tuple(int(v) % self.p for v in x)
            if len(coords) != self.n:
                raise ValidationError("arity mismatch", code="validation.poly")
        total = TorusValue.zero(self.p)
        for (exps, k), c in self.terms.items():
            m = 1
            for xi, d in zip(coords, exps):
                if d:
                    m *= xi ** d
            total = total + TorusValue(c * m, k, self.p)
        return total

    def to_table(self) -> "TorusFunction":
        """Exact value table over all p^n points (vectorized)."""
        K = self.depth
        mod = self.p ** (K + 1)
        digits = digit_matrix(self.p, self.n).astype(np.int64)
        nums = np.zeros(self.p ** self.n, dtype=np.int64)
        for (exps, k), c in self.terms.items():
            term = np.full(len(nums), c, dtype=np.int64)
            for i, d in enumerate(exps):
                if d:
                    term = (term * digits[:, i] ** d) % mod
            nums = (nums + term * self.p ** (K - k)) % mod
        return TorusFunction(self.p, self.n, K, nums)

    # -- algebra -------------------------------------------------------------

    def _int_terms(self) -> dict[MonomialKey, int]:
        return dict(self.terms)

    def __add__(self, other: "TorusPolynomial") -> "TorusPolynomial":
        if (self.p, self.n) != (other.p, other.n):
            raise ValidationError("cannot add polynomials on different domains",
                                  code="validation.poly")
        merged = self._int_terms()
        for key, c in other.terms.items():
            merged[key] = merged.get(key, 0) + c
        return TorusPolynomial(self.p, self.n, merged)

    def __neg__(self) -> "TorusPolynomial":
        return TorusPolynomial(self.p, self.n,
                               {key: -c for key, c in self.terms.items()})

    def __sub__(self, other: "TorusPolynomial") -> "TorusPolynomial":
        return self + (-other)

    def scaled(self, scalar: int) -> "TorusPolynomial":
        """The integer multiple scalar * P in canonical form."""
        if scalar < 0:
            raise ValidationError("scalar must be nonnegative",
                                  code="validation.poly")
        return TorusPolynomial(self.p, self.n,
                               {key: scalar * c for key, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (isinstance(other, TorusPolynomial)
                and (self.p, self.n, self.terms) == (other.p, other.n, other.terms))

    def __hash__(self):
        return hash((self.p, self.n, tuple(sorted(self.terms.items()))))

    def __repr__(self) -> str:
        if self.is_zero:
            return f"TorusPolynomial(F_{self.p}^{self.n}, 0)"
        bits = []
        for (exps, k), c in sorted(self.terms.items()):
            mono = "".join(f"|x{i + 1}|^{d}" if d > 1 else f"|x{i + 1}|"
                           for i, d in enumerate(exps) if d)
            bits.append(f"{c}*{mono}/{self.p ** (k + 1)}")
        return f"TorusPolynomial(F_{self.p}^{self.n}, " + " + ".join(bits) + ")"

    @classmethod
    def zero(cls, p: int, n: int) -> "TorusPolynomial":
        return cls(p, n, {})

    @classmethod
    def monomial(cls, p: int, n: int, exps: Sequence[int], k: int = 0,
                 c: int = 1) -> "TorusPolynomial":
        return cls(p, n, {(tuple(int(e) for e in exps), int(k)): int(c)})


def _normalize(p: int, n: int, raw: Mapping[MonomialKey, int]) -> dict[MonomialKey, int]:
    """Reduce integer coefficients to the canonical form.

    A coefficient c at depth k stands for c/p^(k+1); its base-p digit stays
    at depth k and the quotient carries to depth k-1 (p * m / p^(k+1) is the
    same monomial one level down).  Carries past depth 0 are integers mod 1
    and vanish.  Processing depths from the top down resolves all cascades.
    """
    acc: dict[MonomialKey, int] = {}
    for (exps, k), c in raw.items():
        exps = tuple(int(e) for e in exps)
        if len(exps) != n:
            raise ValidationError("exponent vector has wrong arity",
                                  code="validation.poly")
        if any(not 0 <= e < p for e in exps):
            raise ValidationError("exponents must lie in [0, p-1]",
                                  code="validation.poly")
        if k < 0:
            raise ValidationError("negative depth index", code="validation.poly")
        if not any(exps):
            if c % p ** (k + 1):
                raise ValidationError("constant terms are not representable "
                                      "(shifts are fixed to zero)",
                                      code="validation.poly")
            continue
        acc[(exps, k)] = acc.get((exps, k), 0) + int(c)
    if not acc:
        return {}
    levels: dict[int, dict[tuple[int, ...], int]] = {}
    for (exps, k), c in acc.items():
        levels.setdefault(k, {})[exps] = levels.get(k, {}).get(exps, 0) + c
    out: dict[MonomialKey, int] = {}
    for k in range(max(levels), -1, -1):
        for exps, c in levels.get(k, {}).items():
            digit = c % p
            carry = (c - digit) // p
            if digit:
                out[(exps, k)] = digit
            if carry and k > 0:
                below = levels.setdefault(k - 1, {})
                below[exps] = below.get(exps, 0) + carry
    return out


def degree_depth_structural(poly: TorusPolynomial) -> tuple[int, int]:
    """(structural degree, structural depth) read off the monomial form."""
    return poly.degree, poly.depth


def scalar_multiple(poly: TorusPolynomial, scalar: int) -> TorusPolynomial:
    """Canonical form of scalar * P.

    Multiplying by p moves every term one depth level down, so degree drops
    by p - 1 and depth by 1 whenever the top-degree term sits at positive
    depth; classical polynomials are annihilated.
    """
    return poly.scaled(scalar)


def embed_classical(p: int, n: int,
                    coeffs: Mapping[Sequence[int], int]) -> TorusPolynomial:
    """Embed a classical polynomial (exponents -> F_p coefficient) at depth 0."""
    return TorusPolynomial(
        p, n, {(tuple(int(e) for e in exps), 0): int(c) % p
               for exps, c in coeffs.items()})


# ---------------------------------------------------------------------------
# Exact value tables.

class TorusFunction:
    """A map F_p^n -> U_(k+1) stored as numerators over p^(k+1)."""

    def __init__(self, p: int, n: int, k: int, nums: np.ndarray):
        validate_prime(p)
        nums = np.asarray(nums, dtype=np.int64) % p ** (k + 1)
        if nums.shape != (p ** n,):
            raise ValidationError(
                f"table must have length {p ** n}", code="validation.table")
        self.p, self.n, self.k = p, n, k
        self.nums = nums
        self.nums.setflags(write=False)

    @classmethod
    def from_values(cls, p: int, n: int, values: Sequence[TorusValue]) -> "TorusFunction":
        k = max((v.k for v in values), default=0)
        nums = np.array([v.lift_num(k) for v in values], dtype=np.int64)
        return cls(p, n, k, nums)

    @classmethod
    def from_polynomial(cls, poly: TorusPolynomial) -> "TorusFunction":
        return poly.to_table()

    def value(self, index: int) -> TorusValue:
        return TorusValue(int(self.nums[index]), self.k, self.p)

    def values(self) -> list[TorusValue]:
        return [self.value(i) for i in range(len(self.nums))]

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.nums == self.nums[0]))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.nums == 0))

    def canonical(self) -> "TorusFunction":
        """Equivalent table over the smallest denominator."""
        k, nums = self.k, self.nums
        while k > 0 and not np.any(nums % self.p):
            nums = nums // self.p
            k -= 1
        return TorusFunction(self.p, self.n, k, nums)

    def key(self) -> bytes:
        c = self.canonical()
        return bytes([c.k]) + c.nums.tobytes()

    def distinct_value_count(self) -> int:
        return int(np.unique(self.nums).size)

    def derivative(self, h: "FieldVector | int") -> "TorusFunction":
        """x -> F(x + h) - F(x), exactly."""
        h_idx = h.to_index() if isinstance(h, FieldVector) else int(h)
        if isinstance(h, FieldVector) and (h.p != self.p or h.n != self.n):
            raise ValidationError("direction has wrong shape", code="validation.table")
        idx = np.arange(len(self.nums))
        shifted = self.nums[add_indices(self.p, self.n, idx, h_idx)]
        return TorusFunction(self.p, self.n, self.k,
                             (shifted - self.nums) % self.p ** (self.k + 1))

    def fractions(self) -> list:
        from fractions import Fraction
        d = self.p ** (self.k + 1)
        return [Fraction(int(v), d) for v in self.nums]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TorusFunction):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return (a.p, a.n, a.k) == (b.p, b.n, b.k) and bool(np.array_equal(a.nums, b.nums))

    def __hash__(self):
        return hash((self.p, self.n, self.key()))


def additive_derivative(table: TorusFunction, h: "FieldVector | int") -> TorusFunction:
    """Derivative of a value table in direction h."""
    return table.derivative(h)


def degree_from_table(table: TorusFunction, d_max: int, *,
                      max_work: int | None = DEFAULT_WORK_CEILING,
                      samples: int = 0,
                      seed=None) -> int | None:
    """Least d <= d_max with all (d+1)-fold derivatives identically zero.

    Returns None when the degree exceeds d_max.  Uses the recursion
    deg(F) = 1 + max_h deg(D_h F) with memoization on canonical tables;
    a budget-limited branch that cannot resolve within d_max returns the
    exceeds marker immediately.

    With samples > 0 the check is Monte Carlo instead: for each candidate d
    it tests `samples` random derivative tuples, so the result is a lower
    bound that holds with high probability only.
    """
    if d_max < 0:
        raise ValidationError("d_max must be >= 0", code="validation.degree")
    size = table.p ** table.n
    if samples > 0:
        return _degree_sampled(table, d_max, samples, seed)
    estimate = size ** 2 * (d_max + 2)
    check_work(estimate, max_work, "degree_from_table")
    state = _DegreeState(max_work)
    result = _degree_rec(table.canonical(), d_max, state)
    return None if result is _EXCEEDS else result


_EXCEEDS = object()


class _DegreeState:
    def __init__(self, max_work: int | None):
        self.exact: dict[bytes, int] = {}
        self.exceeded: dict[bytes, int] = {}
        self.work = 0
        self.max_work = max_work

    def charge(self, units: int):
        self.work += units
        if self.max_work is not None and self.work > self.max_work:
            check_work(self.work, self.max_work, "degree_from_table")


def _degree_rec(table: TorusFunction, budget: int, state: _DegreeState):
    key = table.key()
    known = state.exact.get(key)
    if known is not None:
        return known if known <= budget else _EXCEEDS
    if table.is_constant:
        state.exact[key] = 0
        return 0
    if budget <= 0 or state.exceeded.get(key, -1) >= budget:
        state.exceeded[key] = max(state.exceeded.get(key, 0), budget)
        return _EXCEEDS
    size = table.p ** table.n
    best = 0
    for h in range(1, size):
        state.charge(size)
        sub = _degree_rec(table.derivative(h).canonical(), budget - 1, state)
        if sub is _EXCEEDS:
            state.exceeded[key] = max(state.exceeded.get(key, 0), budget)
            return _EXCEEDS
        best = max(best, sub + 1)
    state.exact[key] = best
    return best


def _degree_sampled(table: TorusFunction, d_max: int, samples: int, seed) -> int | None:
    from .field import as_seed
    rng = as_seed(seed if seed is not None else 0).generator()
    size = table.p ** table.n
    mod = table.p ** (table.k + 1)
    idx = np.arange(size)
    for d in range(0, d_max + 1):
        ok = True
        for _ in range(samples):
            hs = rng.integers(0, size, size=d + 1)
            cur = table.nums
            for h in hs:
                cur = (cur[add_indices(table.p, table.n, idx, int(h))] - cur) % mod
            if np.any(cur):
                ok = False
                break
        if ok:
            return d
    return None


def monomial_shapes(p: int, n: int, max_degree: int, *,
                    max_depth: int | None = None) -> list[tuple[tuple[int, ...], int]]:
    """Monomial keys (exps, k) at maximal feasible depth for the degree cap.

    Every polynomial of degree <= max_degree (and depth <= max_depth when
    given) is an integer combination of these monomials with coefficients
    below p^(k+1), so they generate the whole family as an abelian group.
    """
    from itertools import product as iter_product
    shapes = []
    for exps in iter_product(range(p), repeat=n):
        w = sum(exps)
        if not 0 < w <= max_degree:
            continue
        k_m = (max_degree - w) // (p - 1)
        if max_depth is not None:
            k_m = min(k_m, max_depth)
        shapes.append((exps, k_m))
    return shapes


# ---------------------------------------------------------------------------
# Random instances for experiments.

def random_polynomial(p: int, n: int, degree: int, seed, *,
                      extra_terms: int | None = None,
                      top_depth: int | None = None) -> TorusPolynomial:
    """Random polynomial of exact structural degree ``degree``.

    One term is planted to realize the degree (at depth ``top_depth`` when
    given, else at a random feasible depth); additional random terms of
    structural degree <= degree are merged in at distinct monomial keys so
    the planted term cannot cancel.
    """
    from .field import as_seed
    validate_prime(p)
    if degree == 0:
        return TorusPolynomial.zero(p, n)
    rng = as_seed(seed).generator() if not isinstance(seed, np.random.Generator) else seed
    max_k = (degree - 1) // (p - 1)
    feasible = [k for k in range(max_k + 1) if 1 <= degree - k * (p - 1) <= n * (p - 1)]
    if not feasible:
        raise ValidationError(
            f"degree {degree} is not realizable on F_{p}^{n}",
            code="validation.poly")
    if top_depth is not None:
        if top_depth not in feasible:
            raise ValidationError("requested top depth is infeasible",
                                  code="validation.poly")
        k_top = top_depth
    else:
        k_top = int(rng.choice(feasible))
    exps_top = _random_composition(rng, p, n, degree - k_top * (p - 1))
    terms = {(exps_top, k_top): int(rng.integers(1, p))}
    n_extra = int(rng.integers(0, n + 2)) if extra_terms is None else extra_terms
    for _ in range(n_extra):
        for _attempt in range(20):
            k = int(rng.integers(0, max_k + 1))
            top = degree - k * (p - 1)
            if top < 1:
                continue
            weight = int(rng.integers(1, min(top, n * (p - 1)) + 1))
            key = (_random_composition(rng, p, n, weight), k)
            if key not in terms:
                terms[key] = int(rng.integers(1, p))
                break
    return TorusPolynomial(p, n, terms)


def _random_composition(rng, p: int, n: int, total: int) -> tuple[int, ...]:
    """Random exponent vector with entries < p summing to ``total``."""
    exps = [0] * n
    remaining = total
    while remaining > 0:
        open_slots = [i for i in range(n) if exps[i] < p - 1]
        i = int(rng.choice(open_slots))
        room = p - 1 - exps[i]
        step = int(rng.integers(1, min(room, remaining) + 1))
        exps[i] += step
        remaining -= step
    return tuple(exps)
