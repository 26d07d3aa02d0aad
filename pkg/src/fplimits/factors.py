"""Polynomial factors, conditional expectation, the degree-one
decomposition, and explicit polynomial constructions.

A factor is a tuple of torus-valued polynomials on a common domain; its
atoms are the joint level sets.  The degree-one decomposition splits a 0/1
table into a structured part (conditional expectation on a factor of linear
phases with large Walsh coefficients), a uniform part with small order-2
norm, and a zero error term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ValidationError, WorkCeilingExceeded
from .field import as_seed, digit_matrix, validate_prime
from .linear_systems import LinearFormSystem, pattern_density_exact
from .polynomials import (TorusFunction, TorusPolynomial, monomial_shapes,
                          scalar_multiple)
from .runtime import DEFAULT_WORK_CEILING, check_work, parallel_map
from .torus import TorusValue
from .uniformity import INFINITE_RANK, composition_rank, walsh_coefficients


@dataclass(frozen=True)
class PolynomialFactor:
    """A tuple of polynomials sharing (p, n); atoms are joint value vectors."""

    polynomials: tuple[TorusPolynomial, ...]
    p: int
    n: int

    def __post_init__(self):
        for poly in self.polynomials:
            if (poly.p, poly.n) != (self.p, self.n):
                raise ValidationError("factor polynomials must share a domain",
                                      code="validation.factor")

    @classmethod
    def of(cls, polynomials: Sequence[TorusPolynomial], p: int | None = None,
           n: int | None = None) -> "PolynomialFactor":
        polynomials = tuple(polynomials)
        if not polynomials and (p is None or n is None):
            raise ValidationError("empty factor needs explicit p and n",
                                  code="validation.factor")
        if polynomials:
            p, n = polynomials[0].p, polynomials[0].n
        return cls(polynomials, p, n)

    @property
    def complexity(self) -> int:
        return len(self.polynomials)

    @property
    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(poly.degree for poly in self.polynomials)

    @property
    def depth_sequence(self) -> tuple[int, ...]:
        return tuple(poly.depth for poly in self.polynomials)

    def value_tables(self) -> list[TorusFunction]:
        return [poly.to_table() for poly in self.polynomials]

    def atom_codes(self) -> np.ndarray:
        """Mixed-radix code of the atom of every point of F_p^n."""
        codes = np.zeros(self.p ** self.n, dtype=np.int64)
        weight = 1
        for poly in self.polynomials:
            table = poly.to_table()
            lifted = table.nums * (self.p ** (poly.depth - table.k))
            codes += weight * lifted
            weight *= self.p ** (poly.depth + 1)
        return codes

    def atom_of(self, index: int) -> tuple[TorusValue, ...]:
        from .field import FieldVector
        x = FieldVector.from_index(self.p, self.n, index)
        return tuple(poly(x) for poly in self.polynomials)

    def decode_atom(self, code: int) -> tuple[TorusValue, ...]:
        out = []
        for poly in self.polynomials:
            radix = self.p ** (poly.depth + 1)
            out.append(TorusValue(code % radix, poly.depth, self.p))
            code //= radix
        return tuple(out)


def factor_project(f, factor: PolynomialFactor, *, exact: bool = False):
    """Conditional expectation of f on the factor's atoms.

    Returns a float table constant on atoms with the same global mean as f;
    with exact=True returns a list of Fractions instead.
    """
    values = np.asarray(getattr(f, "values", f))
    if values.shape != (factor.p ** factor.n,):
        raise ValidationError("table does not match factor domain",
                              code="validation.factor")
    codes = factor.atom_codes()
    _, compact = np.unique(codes, return_inverse=True)
    counts = np.bincount(compact)
    if exact:
        atom_sums = [0] * len(counts)
        for c, v in zip(compact.tolist(), values.tolist()):
            atom_sums[c] += Fraction(v) if not isinstance(v, int) else v
        return [Fraction(atom_sums[c], int(counts[c])) for c in compact.tolist()]
    sums = np.bincount(compact, weights=values.astype(np.float64))
    return (sums / counts)[compact]


# ---------------------------------------------------------------------------
# Degree-one decomposition via the Walsh spectrum (p = 2).

@dataclass(frozen=True)
class Decomposition:
    """f = f1 + f2 + f3 with f1 the factor average and f3 = 0 here."""

    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    factor: PolynomialFactor
    tau: float


def decompose_degree1(f, tau: float, *, max_complexity: int | None = None
                      ) -> Decomposition:
    """Split a 0/1 table on F_2^n against the span of its large spectrum.

    The factor is generated by the linear phases whose Walsh coefficient is
    at least tau in absolute value; every character outside that span has
    coefficient below tau, which forces the fourth power of the order-2 norm
    of f2 below tau^2.  Refuses (with the workable threshold attached) when
    the factor would be larger than max_complexity.
    """
    from .uniformity import ComplexFunction
    values = np.asarray(getattr(f, "values", f))
    size = len(values)
    n = size.bit_length() - 1
    if 2 ** n != size:
        raise ValidationError("table length must be a power of 2",
                              code="validation.table")
    if not np.all((values == 0) | (values == 1)):
        raise ValidationError("decomposition expects a 0/1 table",
                              code="validation.table")
    if not 0 < tau < 1:
        raise ValidationError("tau must lie in (0, 1)", code="validation.factor")
    cap = min(n, 14) if max_complexity is None else max_complexity
    coefs = walsh_coefficients(ComplexFunction.from_binary(2, n, values)).real
    magnitudes = np.abs(coefs)
    heavy = [int(chi) for chi in range(1, size) if magnitudes[chi] >= tau]
    basis = _gf2_span_basis(heavy)
    if len(basis) > cap:
        workable = _workable_threshold(magnitudes, cap)
        raise WorkCeilingExceeded(
            f"factor complexity {len(basis)} exceeds cap {cap}; "
            f"the call succeeds at tau >= {workable}",
            estimate=len(basis), ceiling=cap, hint=workable)
    polys = tuple(
        TorusPolynomial(2, n, {(tuple((chi >> i) & 1 for i in range(n)), 0): 1})
        for chi in basis)
    factor = PolynomialFactor(polys, 2, n)
    f1 = factor_project(values, factor)
    f2 = values.astype(np.float64) - f1
    f3 = np.zeros_like(f1)
    return Decomposition(f1=f1, f2=f2, f3=f3, factor=factor, tau=tau)


def _gf2_span_basis(vectors: Iterable[int]) -> list[int]:
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return basis


def _workable_threshold(magnitudes: np.ndarray, cap: int) -> float:
    candidates = sorted(set(np.abs(magnitudes[1:]).tolist()), reverse=True)
    for value in candidates:
        heavy = [chi for chi in range(1, len(magnitudes))
                 if abs(magnitudes[chi]) >= value]
        if len(_gf2_span_basis(heavy)) <= cap:
            continue
        # previous candidate was the last workable one
        idx = candidates.index(value)
        return float(candidates[idx - 1]) if idx else float(1.0)
    return float(candidates[-1]) if candidates else 1.0


@dataclass(frozen=True)
class DecompositionGapReport:
    density_f: float
    density_f1: float
    gap: float
    factor_complexity: int
    note: str


def decomp_approx_check(f, system: LinearFormSystem, tau: float, *,
                        max_work: int | None = DEFAULT_WORK_CEILING
                        ) -> DecompositionGapReport:
    """Compare the form-product average of f and of its structured part.

    The declared complexity of the system is the regime in which the gap is
    guaranteed small for good decompositions; it must be set by the caller.
    """
    if system.declared_complexity is None:
        raise ValidationError("system must carry a declared complexity",
                              code="validation.system")
    dec = decompose_degree1(f, tau)
    t_f = pattern_density_exact(f, system, max_work=max_work)
    t_f1 = pattern_density_exact(dec.f1, system, max_work=max_work)
    gap = abs(float(t_f) - float(t_f1))
    note = (f"with m = {system.m} forms the generic bound has shape "
            f"3^m * delta'(...) = {3 ** system.m} * delta'; "
            f"factor complexity {dec.factor.complexity} at tau = {tau}")
    return DecompositionGapReport(
        density_f=float(t_f), density_f1=float(t_f1), gap=gap,
        factor_complexity=dec.factor.complexity, note=note)


# ---------------------------------------------------------------------------
# Explicit constructions.

def high_rank_factor(dvec: Sequence[int], kvec: Sequence[int], r: int, p: int
                     ) -> tuple[PolynomialFactor, int]:
    """Polynomials on disjoint variable blocks with prescribed types.

    The i-th polynomial is a sum of r products of m_i = d_i - (p-1) k_i
    fresh variables, divided by p^(k_i + 1); it has structural degree d_i
    and depth k_i, and the family gets generic (high rank) as r grows.
    Returns the factor together with the number of variables used.
    """
    validate_prime(p)
    if len(dvec) != len(kvec):
        raise ValidationError("degree and depth sequences differ in length",
                              code="validation.factor")
    if r < 1:
        raise ValidationError("need r >= 1", code="validation.factor")
    ms = []
    for d, k in zip(dvec, kvec):
        if d < 1 or k < 0 or k > (d - 1) // (p - 1):
            raise ValidationError(
                f"depth {k} invalid for degree {d} over F_{p}",
                code="validation.factor")
        ms.append(d - (p - 1) * k)
    n_required = sum(m * r for m in ms)
    polys = []
    offset = 0
    for (d, k), m in zip(zip(dvec, kvec), ms):
        terms = {}
        for s in range(r):
            exps = [0] * n_required
            for t in range(m):
                exps[offset + s * m + t] = 1
            terms[(tuple(exps), k)] = 1
        polys.append(TorusPolynomial(p, n_required, terms))
        offset += m * r
    return PolynomialFactor(tuple(polys), p, n_required), n_required


def factor_rank_small(factor: PolynomialFactor, *,
                      max_combinations: int = 4096,
                      max_candidates: int = 2 ** 20) -> float:
    """Least rank over all nonzero integer combinations of the factor.

    Combination i runs over coefficients 0 <= c_i < p^(k_i + 1); the rank of
    each combination is its composition rank at its own degree (infinite for
    nonconstant linear combinations, zero for constants).  Exhaustive and
    meant for tiny domains only.
    """
    p = factor.p
    radices = [p ** (k + 1) for k in factor.depth_sequence]
    total = math.prod(radices) if radices else 1
    check_work(total, max_combinations, "factor_rank_small")
    best = INFINITE_RANK
    for combo in iter_product(*(range(rad) for rad in radices)):
        if not any(combo):
            continue
        poly = TorusPolynomial.zero(p, factor.n)
        for coeff, base in zip(combo, factor.polynomials):
            poly = poly + scalar_multiple(base, coeff)
        if poly.is_zero:
            return 0
        order = max(poly.degree, 1)
        result = composition_rank(poly, order, max_candidates=max_candidates)
        rank = result.rank if result.rank == INFINITE_RANK else int(result.rank)
        best = min(best, rank)
        if best == 0:
            return 0
    return best


# ---------------------------------------------------------------------------
# Depth reduction of polynomials of type (1 + k(p-1), k).

def carry_digit_identity(p: int, k: int, big_m: int) -> bool:
    """Check that the depth-k digit of M is recoverable from M^p - M.

    With M = a + b p^k mod p^(k+1), 0 <= a < p^k, 0 <= b < p, expanding the
    p-th power modulo p^(k+1) kills every mixed binomial term, so

        b p^k = (a + b p^k) - (a + b p^k)^p + (a^p - a)   mod p^(k+1).

    For p = 2 the sign of the right side is immaterial since 2 b p^k = 0
    mod p^(k+1).
    """
    if k < 1:
        raise ValidationError("identity needs k >= 1", code="validation.depth")
    mod = p ** (k + 1)
    a = big_m % p ** k
    b = (big_m % mod) // p ** k
    lhs = (b * p ** k) % mod
    rhs = ((a + b * p ** k) - (a + b * p ** k) ** p + (a ** p - a)) % mod
    return lhs == rhs


@dataclass(frozen=True)
class DepthReduction:
    """Split of a maximal-depth polynomial into lower-depth data.

    linear_part carries M/p^k (depth k-1), fermat_part the table of
    (M^p - M)/p^(k+1) (depth <= k-1), residual the remaining terms.  The
    original value at any point is recovered exactly by ``reconstruct``.
    """

    p: int
    n: int
    k: int
    coefficients: tuple[int, ...]
    linear_part: TorusPolynomial
    fermat_part: TorusFunction
    residual: TorusPolynomial

    def reconstruct(self, linear_value: TorusValue, fermat_value: TorusValue,
                    residual_value: TorusValue) -> TorusValue:
        # a = M mod p^k from the linear part; then b from the Fermat part
        # via b p^k = (M - M^p) + (a^p - a) mod p^(k+1).
        p, k = self.p, self.k
        a = linear_value.lift_num(k - 1)
        v = fermat_value.lift_num(k)
        rhs = ((a ** p - a) - v) % p ** (k + 1)
        if rhs % p ** k:
            raise ValidationError("inconsistent component values",
                                  code="validation.depth")
        b = rhs // p ** k
        return TorusValue(a + b * p ** k, k, p) + residual_value

    def reconstruct_table(self) -> TorusFunction:
        lin = self.linear_part.to_table()
        res = self.residual.to_table()
        vals = [self.reconstruct(lin.value(i), self.fermat_part.value(i),
                                 res.value(i))
                for i in range(self.p ** self.n)]
        return TorusFunction.from_values(self.p, self.n, vals)


def depth_reduce(poly: TorusPolynomial, k: int | None = None) -> DepthReduction:
    """Express a polynomial of type (1 + k(p-1), k) through shallower data.

    Requires every depth-k term to be linear; the depth-k part sum c_i |x_i|
    over p^(k+1) is encoded by M/p^k together with the table of
    (M^p - M)/p^(k+1), and the residual collects all other terms.
    """
    p, n = poly.p, poly.n
    if k is None:
        k = poly.depth
    if k < 1:
        raise ValidationError("depth reduction needs depth >= 1",
                              code="validation.depth")
    if poly.depth > k:
        raise ValidationError("polynomial is deeper than the requested level",
                              code="validation.depth")
    coeffs = [0] * n
    residual_terms = {}
    for (exps, kk), c in poly.terms.items():
        if kk == k:
            if sum(exps) != 1:
                raise ValidationError(
                    "all maximal-depth terms must be linear",
                    code="validation.depth")
            coeffs[exps.index(1)] = c
        else:
            residual_terms[(exps, kk)] = c
    linear = TorusPolynomial(
        p, n, {(tuple(1 if j == i else 0 for j in range(n)), k - 1): c
               for i, c in enumerate(coeffs) if c})
    digits = digit_matrix(p, n).astype(np.int64)
    big_m = digits @ np.array(coeffs, dtype=np.int64)
    mod = p ** (k + 1)
    fermat_nums = (big_m ** p - big_m) % mod
    fermat = TorusFunction(p, n, k, fermat_nums)
    residual = TorusPolynomial(p, n, residual_terms)
    return DepthReduction(p=p, n=n, k=k, coefficients=tuple(coeffs),
                          linear_part=linear, fermat_part=fermat,
                          residual=residual)


# ---------------------------------------------------------------------------
# Low-correlation witnesses and correlation scans.

def low_correlation_polynomial(m: int, depth_index: int, n: int, p: int
                               ) -> TorusPolynomial:
    """Sum of floor(n/m) disjoint products of m variables at a depth level.

    The result has structural degree m + depth_index*(p-1) and depth
    depth_index; as n grows it correlates poorly with everything of lower
    type, which is what makes it a useful witness.
    """
    validate_prime(p)
    if m < 2:
        raise ValidationError("block size must be >= 2", code="validation.factor")
    if n < m:
        raise ValidationError("need n >= m", code="validation.factor")
    if depth_index < 0:
        raise ValidationError("negative depth index", code="validation.factor")
    terms = {}
    for s in range(n // m):
        exps = [0] * n
        for t in range(m):
            exps[s * m + t] = 1
        terms[(tuple(exps), depth_index)] = 1
    return TorusPolynomial(p, n, terms)


@dataclass(frozen=True)
class CorrelationScanReport:
    max_correlation: float
    argmax: TorusPolynomial | None
    scanned: int
    exhaustive: bool


def correlation_scan(poly: TorusPolynomial,
                     candidates: Iterable[TorusPolynomial] | None = None, *,
                     degree_bound: int = 1,
                     max_candidates: int = 2 ** 16,
                     sample_size: int = 4096,
                     seed=0,
                     workers: int | None = None) -> CorrelationScanReport:
    """Largest |E e(P - R)| over a finite candidate family.

    With no explicit candidates: all classical polynomials of degree at most
    degree_bound when that family fits under max_candidates (exhaustive),
    otherwise a seeded random sample from it.  The scan never quantifies
    over all polynomials; ``exhaustive`` records which regime ran.
    """
    p, n = poly.p, poly.n
    table = poly.to_table()
    phase = np.exp(2j * np.pi * table.nums / p ** (table.k + 1))
    exhaustive = candidates is None
    if candidates is None:
        shapes = monomial_shapes(p, n, degree_bound, max_depth=0)
        family_size = p ** len(shapes)
        if family_size <= max_candidates:
            candidates = _all_classical(p, n, shapes)
        else:
            exhaustive = False
            rng = as_seed(seed).generator()
            candidates = [_random_classical(p, n, shapes, rng)
                          for _ in range(sample_size)]
    candidates = list(candidates)

    def corr(candidate: TorusPolynomial) -> float:
        t = candidate.to_table()
        other = np.exp(2j * np.pi * t.nums / p ** (t.k + 1))
        return float(abs(np.mean(phase * np.conj(other))))

    values = parallel_map(corr, candidates, workers)
    if not values:
        return CorrelationScanReport(0.0, None, 0, exhaustive)
    best = int(np.argmax(values))
    return CorrelationScanReport(max_correlation=float(values[best]),
                                 argmax=candidates[best],
                                 scanned=len(candidates),
                                 exhaustive=exhaustive)


def _all_classical(p: int, n: int, shapes) -> list[TorusPolynomial]:
    out = []
    for combo in iter_product(range(p), repeat=len(shapes)):
        terms = {(exps, 0): c for (exps, _), c in zip(shapes, combo) if c}
        out.append(TorusPolynomial(p, n, terms))
    return out


def _random_classical(p: int, n: int, shapes, rng) -> TorusPolynomial:
    terms = {}
    for exps, _ in shapes:
        c = int(rng.integers(0, p))
        if c:
            terms[(exps, 0)] = c
    return TorusPolynomial(p, n, terms)
