# apps/pencils/core.py
"""
The matrix pencil ``sE - A`` and its determinant polynomial.

Points of the extended complex plane are plain Python complex numbers. The
point at infinity is ``INFINITY``.
"""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from .conf import setting
from .exceptions import ShapeMismatch
from .poly import Polynomial, default_nodes, interpolate

logger = logging.getLogger(__name__)

INFINITY = complex(math.inf, 0.0)


def is_infinite(value):
    return cmath.isinf(complex(value))


def same_point(a, b, tol):
    """Equality in the extended plane, relative to ``max(1, |a|)``."""
    if is_infinite(a) or is_infinite(b):
        return is_infinite(a) and is_infinite(b)
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(a))


def format_point(value):
    if is_infinite(value):
        return "inf"
    value = complex(value)
    if value.imag == 0:
        return f"{value.real:.6g}"
    return f"{value.real:.6g}{value.imag:+.6g}i"


def _frozen(matrix):
    out = np.array(matrix, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Pencil:
    """The pair ``(E, A)`` standing for ``A(s) = sE - A``."""

    E: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        E = np.atleast_2d(np.asarray(self.E, dtype=complex))
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        if E.ndim != 2 or E.shape[0] != E.shape[1] or E.shape != A.shape:
            raise ShapeMismatch(E=list(E.shape), A=list(A.shape))
        object.__setattr__(self, "E", _frozen(E))
        object.__setattr__(self, "A", _frozen(A))

    @classmethod
    def from_matrix(cls, A0):
        """The standard pencil ``sI - A0`` of a square matrix."""
        A0 = np.atleast_2d(np.asarray(A0, dtype=complex))
        return cls(np.eye(A0.shape[0]), A0)

    @property
    def n(self):
        return self.E.shape[0]

    @property
    def is_real(self):
        return not (np.any(self.E.imag) or np.any(self.A.imag))

    @property
    def scale(self):
        return 1.0 + max(np.linalg.norm(self.E, 2), np.linalg.norm(self.A, 2))

    def __add__(self, other):
        if not isinstance(other, Pencil):
            return NotImplemented
        return Pencil(self.E + other.E, self.A + other.A)

    def __repr__(self):
        return f"Pencil(n={self.n}, real={self.is_real})"


@dataclass(frozen=True)
class CharPoly:
    det_poly: Polynomial
    finite_degree: int


def evaluate(P, s0):
    """The matrix ``s0 E - A``."""
    return s0 * P.E - P.A


def _det_samples(P, radius):
    nodes = default_nodes(P.n + 1, radius)
    values = np.array([np.linalg.det(evaluate(P, s)) for s in nodes])
    poly = interpolate(nodes, values)
    return (poly.real() if P.is_real else poly), values


def char_poly(P, degree=None, tol=None):
    """
    ``det(sE - A)`` from ``n + 1`` determinant evaluations.

    The first pass samples on the circle of radius ``P.scale``; top
    coefficients negligible there are dropped. A second pass resamples on a
    circle just enclosing the roots found, so coefficients are accurate
    relative to the roots rather than to the matrix norm. Passing ``degree``
    truncates to a degree already known from rank decisions.
    """
    tol = setting("TOL_REGULAR", tol)
    coarse, values = _det_samples(P, P.scale)
    if not np.any(np.abs(values) > tol * P.scale**P.n):
        return CharPoly(det_poly=Polynomial.zero(), finite_degree=-1)
    if degree is None:
        degree = coarse.trimmed(tol, P.scale).degree
    poly = coarse.truncated(degree)
    if degree >= 1:
        radius = min(P.scale, 1.0 + float(np.max(np.abs(poly.roots()))))
        fine, _ = _det_samples(P, radius)
        poly = fine.truncated(degree)
        logger.debug("det polynomial resampled on radius %.3g", radius)
    return CharPoly(det_poly=poly, finite_degree=poly.degree)


def is_regular(P, tol=None):
    """Whether ``det(sE - A)`` is not identically zero."""
    _, values = _det_samples(P, P.scale)
    threshold = setting("TOL_REGULAR", tol) * P.scale**P.n
    return bool(np.max(np.abs(values)) > threshold)


def dualize(P):
    """The dual pencil ``-sA + E``: it swaps the roles of 0 and infinity."""
    return Pencil(-P.A, -P.E)
