"""Systems of linear forms and the product averages they induce.

Exact averages for 0/1 tables are Fractions.  Over F_2 there is a fast
integer character-sum route: the average equals the sum, over all form
label tuples annihilated by the transpose of the coefficient matrix, of
products of unnormalized Walsh coefficients, divided by 2^(n*m).  The
general route enumerates all point tuples in vectorized blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .field import add_indices, as_seed, indices_from_digit_array, scale_indices, validate_prime
from .runtime import DEFAULT_WORK_CEILING, check_work


@dataclass(frozen=True)
class LinearFormSystem:
    """A finite set of linear forms in ``ell`` variables over F_p."""

    p: int
    ell: int
    forms: tuple[tuple[int, ...], ...]
    declared_complexity: int | None = None

    def __post_init__(self):
        validate_prime(self.p)
        if self.ell < 1:
            raise ValidationError("need at least one variable",
                                  code="validation.system")
        forms = tuple(tuple(int(c) % self.p for c in f) for f in self.forms)
        object.__setattr__(self, "forms", forms)
        if any(len(f) != self.ell for f in forms):
            raise ValidationError("form length mismatch", code="validation.system")
        if len(set(forms)) != len(forms):
            raise ValidationError("forms must be distinct", code="validation.system")
        if self.declared_complexity is not None and self.declared_complexity < 1:
            raise ValidationError("declared complexity must be >= 1",
                                  code="validation.system")

    @property
    def m(self) -> int:
        return len(self.forms)

    @property
    def is_affine(self) -> bool:
        return all(f[0] == 1 for f in self.forms)


def is_affine_system(system: LinearFormSystem) -> bool:
    """True when every form has first coefficient 1 (vacuously for none)."""
    return system.is_affine


def complexity_bound(system: LinearFormSystem) -> int:
    """Declared complexity if present, else the generic bound m * p."""
    if not system.is_affine:
        raise ValidationError("complexity bound applies to affine systems only",
                              code="validation.system")
    if system.declared_complexity is not None:
        return system.declared_complexity
    return system.m * system.p


def resolve_table(f, system: LinearFormSystem) -> tuple[np.ndarray, int, int, bool]:
    """Normalize a table argument to (values, p, n, is_binary)."""
    values = getattr(f, "values", f)
    values = np.asarray(values)
    p = system.p
    size = values.shape[0] if values.ndim == 1 else -1
    n = round(math.log(size, p)) if size > 0 else -1
    if size <= 0 or p ** n != size:
        raise ValidationError(
            f"table length {size} is not a power of {p}", code="validation.table")
    if values.dtype.kind in "iub":
        binary = bool(np.all((values == 0) | (values == 1)))
    else:
        binary = False
    return values, p, n, binary


# ---------------------------------------------------------------------------
# Exact averages.

def pattern_density_exact(f, system: LinearFormSystem, *,
                          max_work: int | None = DEFAULT_WORK_CEILING):
    """Average over uniform x_1..x_ell of the product of f at every form.

    Returns an exact Fraction for 0/1 tables and a float (or complex) for
    real or complex tables.
    """
    values, p, n, binary = resolve_table(f, system)
    if system.m == 0:
        return Fraction(1) if binary else 1.0
    if p == 2:
        kernel = _label_kernel_basis(system)
        if 2 ** (len(kernel) * n) * system.m <= (max_work or float("inf")):
            return _density_by_characters(values, n, system, kernel, binary)
    return _density_by_enumeration(values, p, n, system, binary, max_work)


def _label_kernel_basis(system: LinearFormSystem) -> list[int]:
    """Basis (as bitmasks over forms) of {v : sum_j v_j * form_j = 0}, p=2."""
    m, ell = system.m, system.ell
    # Row-reduce the ell x m system over F_2; columns are form labels.
    rows = []
    for i in range(ell):
        mask = 0
        for j, form in enumerate(system.forms):
            if form[i] % 2:
                mask |= 1 << j
        rows.append(mask)
    pivots = []
    for col in range(m):
        pivot = None
        for r, row in enumerate(rows):
            if r not in [p_r for p_r, _ in pivots] and (row >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        pivots.append((pivot, col))
        for r in range(ell):
            if r != pivot and (rows[r] >> col) & 1:
                rows[r] ^= rows[pivot]
    pivot_cols = {c for _, c in pivots}
    basis = []
    for free in range(m):
        if free in pivot_cols:
            continue
        vec = 1 << free
        for pr, pc in pivots:
            if (rows[pr] >> free) & 1:
                vec |= 1 << pc
        basis.append(vec)
    return basis


def _density_by_characters(values: np.ndarray, n: int,
                           system: LinearFormSystem, kernel: list[int], binary: bool):
    from .uniformity import fwht
    m = system.m
    t = len(kernel)
    if binary:
        coefs = fwht(values.astype(np.int64))
    else:
        coefs = fwht(values.astype(np.complex128)
                     if np.iscomplexobj(values) else values.astype(np.float64))
    # Label tuples in the kernel: one kernel element per bit position.
    count = 1 << (t * n)
    codes = np.arange(count, dtype=np.int64)
    chis = np.zeros((m, count), dtype=np.int64)
    k_elems = np.array(kernel, dtype=np.int64)
    for pos in range(n):
        sel = (codes >> (t * pos)) & ((1 << t) - 1) if t else np.zeros_like(codes)
        elems = _subset_xor(k_elems, sel)
        for j in range(m):
            chis[j] |= ((elems >> j) & 1) << pos
    gathered = [coefs[chis[j]] for j in range(m)]
    if binary:
        exact_bits = n * m + t * n + 2
        if exact_bits <= 62:
            prod = gathered[0].copy()
            for g in gathered[1:]:
                prod *= g
            total = int(prod.sum())
        else:
            total = sum(math.prod(int(g[i]) for g in gathered)
                        for i in range(count))
        return Fraction(total, 2 ** (n * m))
    prod = gathered[0].copy()
    for g in gathered[1:]:
        prod = prod * g
    result = prod.sum() / 2 ** (n * m)
    return complex(result) if np.iscomplexobj(prod) else float(result)


def _subset_xor(basis: np.ndarray, selectors: np.ndarray) -> np.ndarray:
    out = np.zeros_like(selectors)
    for b in range(len(basis)):
        out ^= np.where((selectors >> b) & 1, basis[b], 0)
    return out


def iter_form_index_blocks(system: LinearFormSystem, n: int, *,
                           max_work: int | None = DEFAULT_WORK_CEILING
                           ) -> Iterator[list[np.ndarray]]:
    """Yield, per block, the index arrays (one per form) of the form images.

    Blocks run over all p^(n*(ell-1)) assignments of x_2..x_ell with x_1
    vectorized, covering every point tuple exactly once.
    """
    p, ell, m = system.p, system.ell, system.m
    size = p ** n
    check_work(size ** ell * max(m, 1), max_work, "form enumeration")
    x1 = np.arange(size)
    scaled_x1 = {}
    for form in system.forms:
        lam = form[0]
        if lam not in scaled_x1:
            scaled_x1[lam] = scale_indices(p, n, lam, x1)
    for rest in iter_product(range(size), repeat=ell - 1):
        block = []
        for form in system.forms:
            base = 0
            for lam, xi in zip(form[1:], rest):
                if lam:
                    base = add_indices(p, n, base, scale_indices(p, n, lam, xi))
            idx = scaled_x1[form[0]]
            block.append(add_indices(p, n, idx, base) if form[0] else
                         np.full(size, base))
        yield block


def _density_by_enumeration(values, p, n, system, binary, max_work):
    total_tuples = (p ** n) ** system.ell
    if binary:
        count = 0
        for block in iter_form_index_blocks(system, n, max_work=max_work):
            acc = values[block[0]].astype(np.int64)
            for idx in block[1:]:
                acc = acc * values[idx]
            count += int(acc.sum())
        return Fraction(count, total_tuples)
    sums = []
    for block in iter_form_index_blocks(system, n, max_work=max_work):
        acc = values[block[0]].astype(np.complex128 if np.iscomplexobj(values)
                                      else np.float64)
        for idx in block[1:]:
            acc = acc * values[idx]
        sums.append(acc.sum())
    total = math.fsum(s.real for s in sums)
    if np.iscomplexobj(values):
        return complex(total, math.fsum(s.imag for s in sums)) / total_tuples
    return total / total_tuples


# ---------------------------------------------------------------------------
# Monte Carlo averages.

@dataclass(frozen=True)
class DensityEstimate:
    value: float
    sample_count: int
    standard_error: float


def pattern_density_mc(f, system: LinearFormSystem, samples: int, seed
                       ) -> DensityEstimate:
    """Sampled version of pattern_density_exact, deterministic per seed."""
    if samples < 1:
        raise ValidationError("samples must be >= 1", code="validation.mc")
    values, p, n, _ = resolve_table(f, system)
    rng = as_seed(seed).generator()
    pts = rng.integers(0, p, size=(samples, system.ell, n), dtype=np.int16)
    acc = np.ones(samples, dtype=np.complex128 if np.iscomplexobj(values)
                  else np.float64)
    for form in system.forms:
        digits = np.zeros((samples, n), dtype=np.int16)
        for i, lam in enumerate(form):
            if lam:
                digits = (digits + lam * pts[:, i, :]) % p
        acc = acc * values[indices_from_digit_array(p, digits)]
    mean = acc.mean()
    se = float(np.std(acc, ddof=1) / np.sqrt(samples)) if samples > 1 else float("nan")
    val = complex(mean) if np.iscomplexobj(acc) else float(mean)
    return DensityEstimate(value=val, sample_count=samples, standard_error=se)
