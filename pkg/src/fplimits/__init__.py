"""Desk-scale laboratory for uniformity norms, torus-valued polynomials,
linear-form statistics, and limit objects over prime fields."""

from .errors import FplimitsError, ValidationError, WorkCeilingExceeded
from .field import (AffineMap, FieldScalar, FieldVector, RandomSeed,
                    eval_linear_form, random_affine_map)
from .torus import TorusValue
from .polynomials import (Monomial, TorusFunction, TorusPolynomial,
                          additive_derivative, degree_depth_structural,
                          degree_from_table, embed_classical,
                          random_polynomial, scalar_multiple)

__all__ = [name for name in dir() if not name.startswith("_")]
