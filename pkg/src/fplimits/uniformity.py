"""Gowers uniformity norms and composition rank for functions on F_p^n.

The exact norm uses the derivative recursion: the order-d moment is the
average over directions h of the order-(d-1) moment of the multiplicative
derivative in direction h.  The bottom two levels are evaluated as one
vectorized pass over an index-addition table, so the total cost is about
p^(n*d) array operations.  A literal full-sum evaluator and a
Walsh-transform path (p = 2, order 2) are kept as independent routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .field import addition_table, as_seed, indices_from_digit_array, validate_prime
from .polynomials import TorusFunction, TorusPolynomial
from .runtime import DEFAULT_WORK_CEILING, check_work

INFINITE_RANK = math.inf


@dataclass(frozen=True)
class NormEstimate:
    """A norm value plus provenance (exact vs sampled)."""

    value: float
    mode: str                      # "exact" | "monte-carlo"
    inner_mean: complex            # the averaged derivative moment
    sample_count: int | None = None
    standard_error: float | None = None


class ComplexFunction:
    """A bounded table F_p^n -> C (|value| <= 1 up to rounding)."""

    def __init__(self, p: int, n: int, values):
        validate_prime(p)
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (p ** n,):
            raise ValidationError(f"table must have length {p ** n}",
                                  code="validation.table")
        if np.abs(values).max(initial=0.0) > 1 + 1e-12:
            raise ValidationError("values must be bounded by 1",
                                  code="validation.table")
        self.p, self.n = p, n
        self.values = values
        self.values.setflags(write=False)

    @classmethod
    def from_torus(cls, table: TorusFunction) -> "ComplexFunction":
        angles = table.nums / table.p ** (table.k + 1)
        return cls(table.p, table.n, np.exp(2j * np.pi * angles))

    @classmethod
    def from_binary(cls, p: int, n: int, bits, *, signed: bool = False) -> "ComplexFunction":
        """Wrap a 0/1 table; with signed=True map bit b to (-1)^b."""
        bits = np.asarray(bits)
        vals = 1.0 - 2.0 * bits if signed else bits.astype(np.float64)
        return cls(p, n, vals)


def _mult_derivative(values: np.ndarray, p: int, n: int, h: int) -> np.ndarray:
    size = p ** n
    if size <= 4096:
        return values[addition_table(p, n)[h]] * np.conj(values)
    shape = (p,) * n
    digits = [(h // p ** i) % p for i in range(n)]
    arr = values.reshape(shape, order="F")
    shifted = np.roll(arr, tuple(-d for d in digits), axis=tuple(range(n)))
    return shifted.ravel(order="F") * np.conj(values)


def _moment(values: np.ndarray, p: int, n: int, d: int) -> complex:
    """Average of the d-fold multiplicative derivative over all directions."""
    if d == 0:
        return complex(values.mean())
    if d == 1:
        m = values.mean()
        return complex(m * np.conj(m))
    size = p ** n
    if d == 2 and size <= 2048:
        rows = (values[addition_table(p, n)] * np.conj(values)[None, :]).mean(axis=1)
        return complex((rows * np.conj(rows)).mean())
    total = 0.0 + 0.0j
    for h in range(size):
        total += _moment(_mult_derivative(values, p, n, h), p, n, d - 1)
    return total / size


def gowers_norm_exact(f: ComplexFunction, d: int, *,
                      max_work: int | None = DEFAULT_WORK_CEILING) -> NormEstimate:
    """Order-d uniformity norm by full averaging (derivative recursion)."""
    if d < 1:
        raise ValidationError("order must be >= 1", code="validation.norm")
    check_work((f.p ** f.n) ** (d + 1), max_work, "gowers_norm_exact")
    moment = _moment(f.values, f.p, f.n, d)
    value = max(moment.real, 0.0) ** (1.0 / 2 ** d)
    return NormEstimate(value=value, mode="exact", inner_mean=moment)


def gowers_norm_direct(f: ComplexFunction, d: int) -> NormEstimate:
    """Literal sum over every direction tuple and point; test oracle.

    Refused unless n*(d+1)*log2(p) <= 24, i.e. at most ~16M terms.
    """
    if d < 1:
        raise ValidationError("order must be >= 1", code="validation.norm")
    bits = f.n * (d + 1) * math.log2(f.p)
    if bits > 24 + 1e-9:
        raise ValidationError(
            f"direct evaluation infeasible: n(d+1)log2(p) = {bits:.1f} > 24",
            code="validation.norm")

    def rec(values: np.ndarray, depth: int) -> complex:
        if depth == 1:
            table = addition_table(f.p, f.n)
            plane = values[table] * np.conj(values)[None, :]
            return complex(plane.mean())
        size = f.p ** f.n
        total = 0.0 + 0.0j
        for h in range(size):
            total += rec(_mult_derivative(values, f.p, f.n, h), depth - 1)
        return total / size

    moment = rec(f.values, d)
    value = max(moment.real, 0.0) ** (1.0 / 2 ** d)
    return NormEstimate(value=value, mode="exact", inner_mean=moment)


def walsh_coefficients(f: ComplexFunction) -> np.ndarray:
    """Normalized Walsh transform E_x f(x) (-1)^(chi . x), p = 2 only."""
    if f.p != 2:
        raise ValidationError("Walsh transform requires p = 2",
                              code="validation.norm")
    return fwht(f.values) / len(f.values)


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform (any numeric dtype)."""
    a = np.array(values, copy=True)
    size = a.shape[0]
    h = 1
    while h < size:
        y = a.reshape(size // (2 * h), 2, h)
        even = y[:, 0, :] + y[:, 1, :]
        odd = y[:, 0, :] - y[:, 1, :]
        a = np.stack([even, odd], axis=1).reshape(size)
        h *= 2
    return a


def gowers_u2_via_walsh(f: ComplexFunction) -> NormEstimate:
    """Order-2 norm through the character transform: sum of |coef|^4, p = 2."""
    coefs = walsh_coefficients(f)
    moment = float(np.sum(np.abs(coefs) ** 4))
    return NormEstimate(value=moment ** 0.25, mode="exact", inner_mean=moment)


def gowers_norm_mc(f, d: int, samples: int, seed, *,
                   p: int | None = None, n: int | None = None) -> NormEstimate:
    """Monte Carlo estimate of the order-d norm.

    ``f`` is a ComplexFunction, or a callable taking an (m, n) digit array
    of points and returning complex values (then p and n are required).
    Deterministic for a fixed seed.
    """
    if d < 1 or samples < 1:
        raise ValidationError("need d >= 1 and samples >= 1",
                              code="validation.norm")
    if isinstance(f, ComplexFunction):
        p, n = f.p, f.n
        lookup = lambda pts: f.values[indices_from_digit_array(p, pts)]
    else:
        if p is None or n is None:
            raise ValidationError("callable input needs explicit p and n",
                                  code="validation.norm")
        lookup = f
    rng = as_seed(seed).generator()
    hs = rng.integers(0, p, size=(samples, d, n), dtype=np.int16)
    x = rng.integers(0, p, size=(samples, n), dtype=np.int16)
    vals = np.ones(samples, dtype=np.complex128)
    for mask in range(2 ** d):
        pts = x.copy()
        for i in range(d):
            if (mask >> i) & 1:
                pts = (pts + hs[:, i, :]) % p
        v = np.asarray(lookup(pts), dtype=np.complex128)
        if (d - bin(mask).count("1")) % 2:
            v = np.conj(v)
        vals = vals * v
    mean = complex(vals.mean())
    se = float(np.std(vals, ddof=1) / np.sqrt(samples)) if samples > 1 else float("nan")
    value = abs(mean) ** (1.0 / 2 ** d)
    return NormEstimate(value=value, mode="monte-carlo", inner_mean=mean,
                        sample_count=samples, standard_error=se)


def phase_gowers_norm(poly: TorusPolynomial, d: int, *,
                      max_work: int | None = DEFAULT_WORK_CEILING) -> NormEstimate:
    """Order-d norm of the phase function of a polynomial.

    A value near 1 certifies that the polynomial is far from maximally
    complex at order d (its rank at order d is bounded); no explicit rank
    bound is computed because none is effective.
    """
    return gowers_norm_exact(ComplexFunction.from_torus(poly.to_table()), d,
                             max_work=max_work)


# ---------------------------------------------------------------------------
# Composition rank by exhaustive small-domain search.

@dataclass(frozen=True)
class RankResult:
    rank: float                       # int-valued, or math.inf at order 1
    witness: tuple[TorusPolynomial, ...] | None


def composition_rank(target: "TorusPolynomial | TorusFunction", d: int, *,
                     max_candidates: int = 2 ** 20,
                     max_partitions: int = 200_000) -> RankResult:
    """Least r such that the target is a function of r polynomials of
    degree <= d - 1; exhaustive, intended for p = 2, n <= 4, d <= 3.

    A tuple (Q_1, ..., Q_r) works exactly when its joint level-set
    partition refines the target's level sets, so the search runs over
    distinct candidate partitions with breadth-first meets.
    """
    table = target.to_table() if isinstance(target, TorusPolynomial) else target
    p, n = table.p, table.n
    size = p ** n
    if d < 1:
        raise ValidationError("rank order must be >= 1", code="validation.rank")
    if d == 1:
        if table.is_constant:
            return RankResult(0, ())
        return RankResult(INFINITE_RANK, None)
    if table.is_constant:
        return RankResult(0, ())

    shapes, orders, gen_tables = _candidate_generators(p, n, d - 1)
    total = 1
    for o in orders:
        total *= o
    check_work(total * size, max_candidates * size, "composition_rank")

    # All candidate tables, built generator by generator.
    combos = np.zeros((1, size), dtype=np.int32)
    mod = p ** (1 + max((k for _, k in shapes), default=0))
    for g, order in zip(gen_tables, orders):
        steps = [(combos + t * g[None, :]) % mod for t in range(order)]
        combos = np.concatenate(steps, axis=0)
    # combo index decodes little-endian: generator j varies in blocks of
    # prod(orders[:j]).

    target_labels = _canonical_labels(table.canonical().nums)
    target_key = target_labels.tobytes()

    seen: dict[bytes, tuple[np.ndarray, tuple[int, ...]]] = {}
    base: list[tuple[bytes, np.ndarray, tuple[int, ...]]] = []
    for idx in range(combos.shape[0]):
        labels = _canonical_labels(combos[idx])
        if labels.max(initial=0) == 0:
            continue  # constant candidate carries no information
        key = labels.tobytes()
        if key not in seen:
            seen[key] = (labels, (idx,))
            base.append((key, labels, (idx,)))

    frontier = list(base)
    for r in range(1, size + 1):
        for key, labels, witness_idx in frontier:
            if _refines(labels, target_labels):
                witness = tuple(_decode_candidate(p, n, shapes, orders, i)
                                for i in witness_idx)
                return RankResult(r, witness)
        nxt: list[tuple[bytes, np.ndarray, tuple[int, ...]]] = []
        for key, labels, witness_idx in frontier:
            for bkey, blabels, bidx in base:
                met = _canonical_labels(
                    labels.astype(np.int64) * (blabels.max() + 1) + blabels)
                mkey = met.tobytes()
                if mkey in seen:
                    continue
                entry = (met, witness_idx + bidx)
                seen[mkey] = entry
                nxt.append((mkey, met, witness_idx + bidx))
                if len(seen) > max_partitions:
                    raise check_work(len(seen), max_partitions, "composition_rank")
        if not nxt:
            break
        frontier = nxt
    return RankResult(INFINITE_RANK, None)


def _candidate_generators(p: int, n: int, max_degree: int):
    """Generator monomial tables for all polynomials of degree <= max_degree."""
    from .polynomials import monomial_shapes
    shapes = monomial_shapes(p, n, max_degree)
    orders = [p ** (k + 1) for _, k in shapes]
    max_k = max((k for _, k in shapes), default=0)
    mod = p ** (max_k + 1)
    tables = []
    for exps, k_m in shapes:
        g = TorusPolynomial.monomial(p, n, exps, k=k_m).to_table()
        tables.append((g.nums * (mod // p ** (g.k + 1))) % mod)
    return shapes, orders, tables


def _decode_candidate(p, n, shapes, orders, combo_index) -> TorusPolynomial:
    terms = {}
    rem = combo_index
    for (exps, k_m), order in zip(shapes, orders):
        t = rem % order
        rem //= order
        if t:
            terms[(exps, k_m)] = terms.get((exps, k_m), 0) + t
    return TorusPolynomial(p, n, terms)


def _canonical_labels(values: np.ndarray) -> np.ndarray:
    """Relabel values by first occurrence, as compact int16 labels."""
    _, first, inverse = np.unique(values, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].astype(np.int16)


def _refines(fine: np.ndarray, coarse: np.ndarray) -> bool:
    """True when every block of `fine` lies inside one block of `coarse`."""
    rep: dict[int, int] = {}
    for f, c in zip(fine.tolist(), coarse.tolist()):
        seen = rep.setdefault(f, c)
        if seen != c:
            return False
    return True
