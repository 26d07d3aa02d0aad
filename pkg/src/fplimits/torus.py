"""Exact elements of the circle group with denominator a power of p."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .field import validate_prime


@dataclass(frozen=True)
class TorusValue:
    """The point num / p^(k+1) mod 1, kept in canonical form.

    Canonical means 0 <= num < p^(k+1) and either k == 0 or p does not
    divide num, so structural equality coincides with equality in the
    circle group.  k == 0 with num < p is the image of a field element
    under the standard embedding x -> |x|/p.
    """

    num: int
    k: int
    p: int

    def __post_init__(self):
        validate_prime(self.p)
        if self.k < 0:
            raise ValidationError("negative depth bound", code="validation.torus")
        num = int(self.num) % self.p ** (self.k + 1)
        k = self.k
        while k > 0 and num % self.p == 0:
            num //= self.p
            k -= 1
        if num == 0:
            k = 0
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "k", k)

    @classmethod
    def zero(cls, p: int) -> "TorusValue":
        return cls(0, 0, p)

    @classmethod
    def from_field(cls, value: int, p: int) -> "TorusValue":
        """The embedding of F_p into the p-torsion points: value/p mod 1."""
        return cls(value % p, 0, p)

    @property
    def denominator(self) -> int:
        return self.p ** (self.k + 1)

    def lift_num(self, k: int) -> int:
        """Numerator over the common denominator p^(k+1); requires k >= self.k."""
        if k < self.k:
            raise ValidationError("cannot lower denominator", code="validation.torus")
        return self.num * self.p ** (k - self.k)

    def _check(self, other: "TorusValue"):
        if self.p != other.p:
            raise ValidationError("modulus mismatch", code="validation.torus")

    def __add__(self, other: "TorusValue") -> "TorusValue":
        self._check(other)
        k = max(self.k, other.k)
        return TorusValue(self.lift_num(k) + other.lift_num(k), k, self.p)

    def __neg__(self) -> "TorusValue":
        return TorusValue(-self.num, self.k, self.p)

    def __sub__(self, other: "TorusValue") -> "TorusValue":
        return self + (-other)

    def __mul__(self, scalar: int) -> "TorusValue":
        if not isinstance(scalar, int):
            return NotImplemented
        return TorusValue(scalar * self.num, self.k, self.p)

    __rmul__ = __mul__

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.denominator)

    def __float__(self) -> float:
        return self.num / self.denominator

    def __repr__(self) -> str:
        return f"TorusValue({self.num}/{self.denominator})"
