# apps/pencils/poly.py
"""
Polynomials over the complex field.

Coefficients are stored in ascending order, the convention of
``numpy.polynomial.polynomial``, which does all the arithmetic here. The
roots come from the companion matrix (``polyroots``). Nearby computed roots
are then clustered back into multiple roots.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .conf import setting
from .exceptions import DuplicateNodes, ZeroPolynomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Immutable polynomial, ``coeffs[k]`` multiplies ``s**k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).ravel().copy()
        nonzero = np.flatnonzero(c)
        c = c[: nonzero[-1] + 1] if nonzero.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value):
        return cls([value])

    @classmethod
    def zero(cls):
        return cls([0.0])

    @property
    def is_zero(self):
        return not np.any(self.coeffs)

    @property
    def degree(self):
        """Degree, with -1 for the zero polynomial."""
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def leading(self):
        return complex(self.coeffs[-1])

    @property
    def norm_inf(self):
        return float(np.max(np.abs(self.coeffs)))

    @property
    def is_real(self):
        return not np.any(self.coeffs.imag)

    def __call__(self, s):
        return npoly.polyval(s, self.coeffs)

    def __repr__(self):
        terms = ", ".join(f"{c:.6g}" for c in self.coeffs)
        return f"Polynomial([{terms}])"

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other.coeffs
        return np.atleast_1d(np.asarray(other, dtype=complex))

    def __add__(self, other):
        return Polynomial(npoly.polyadd(self.coeffs, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Polynomial(npoly.polysub(self.coeffs, self._coerce(other)))

    def __rsub__(self, other):
        return Polynomial(npoly.polysub(self._coerce(other), self.coeffs))

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __mul__(self, other):
        return Polynomial(npoly.polymul(self.coeffs, self._coerce(other)))

    __rmul__ = __mul__

    def __pow__(self, power):
        return Polynomial(npoly.polypow(self.coeffs, power))

    def roots(self):
        """Raw companion-matrix roots, without clustering."""
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return npoly.polyroots(self.coeffs)

    def divmod(self, other):
        quotient, remainder = npoly.polydiv(self.coeffs, self._coerce(other))
        return Polynomial(quotient), Polynomial(remainder)

    def derivative(self, order=1):
        if self.degree < order:
            return Polynomial.zero()
        return Polynomial(npoly.polyder(self.coeffs, order))

    def divide_linear(self, root):
        """
        Synthetic division by ``(s - root)``.

        Returns ``(quotient, remainder)`` where the remainder equals the value
        of the polynomial at ``root``.
        """
        c = self.coeffs
        if len(c) == 1:
            return Polynomial.zero(), complex(c[0])
        quotient = np.empty(len(c) - 1, dtype=complex)
        acc = c[-1]
        for k in range(len(c) - 2, -1, -1):
            quotient[k] = acc
            acc = c[k] + root * acc
        return Polynomial(quotient), complex(acc)

    def taylor(self, center, count):
        """The first ``count`` Taylor coefficients ``p^(j)(center)/j!``."""
        out = []
        p = self
        for _ in range(count):
            p, r = p.divide_linear(center)
            out.append(r)
        return np.array(out, dtype=complex)

    def vanishing_order(self, root, threshold, cap=None):
        """
        Multiplicity of ``root`` as a zero, by repeated synthetic division.

        Remainders at or below ``threshold`` count as zero. The zero
        polynomial vanishes to every order and returns ``cap``.
        """
        order = 0
        p = self
        while cap is None or order < cap:
            if p.is_zero:
                return cap if cap is not None else math.inf
            q, r = p.divide_linear(root)
            if abs(r) > threshold:
                break
            order += 1
            p = q
        return order

    def truncated(self, degree):
        """Drops every coefficient above ``degree``."""
        if degree < 0:
            return Polynomial.zero()
        return Polynomial(self.coeffs[: degree + 1])

    def trimmed(self, tol, scale=1.0):
        """
        Drops leading coefficients that are negligible on the disc of radius
        ``scale``: ``|c_k| scale**k <= tol * max_j |c_j| scale**j``.
        """
        weighted = np.abs(self.coeffs) * float(scale) ** np.arange(len(self.coeffs))
        top = weighted.max()
        if top == 0:
            return Polynomial.zero()
        keep = np.flatnonzero(weighted > tol * top)
        return Polynomial(self.coeffs[: keep[-1] + 1])

    def monic(self):
        if self.is_zero:
            raise ZeroPolynomial()
        return Polynomial(self.coeffs / self.coeffs[-1])

    def real(self):
        """Real part of the coefficients, for polynomials known to be real."""
        return Polynomial(self.coeffs.real)

    def allclose(self, other, rtol=1e-8):
        a, b = self.coeffs, self._coerce(other)
        size = max(len(a), len(b))
        a = np.pad(a, (0, size - len(a)))
        b = np.pad(b, (0, size - len(b)))
        scale = max(1.0, np.max(np.abs(a)), np.max(np.abs(b)))
        return bool(np.max(np.abs(a - b)) <= rtol * scale)

    def padded(self, length):
        """Coefficient vector zero-padded (never cut) to ``length`` entries."""
        if self.is_zero:
            return np.zeros(length, dtype=complex)
        return np.pad(self.coeffs, (0, max(0, length - len(self.coeffs))))


@dataclass(frozen=True)
class RootMultiset:
    """Distinct roots with their multiplicities."""

    roots: tuple
    cluster_tol: float = 0.0

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    @property
    def total(self):
        return sum(mult for _, mult in self.roots)

    @property
    def values(self):
        return tuple(value for value, _ in self.roots)

    def expanded(self):
        return [value for value, mult in self.roots for _ in range(mult)]


def default_nodes(count, radius=1.0):
    """``count`` points on the circle of the given radius (scaled roots of unity)."""
    k = np.arange(count)
    # the half-step rotation keeps the nodes off the real axis
    return radius * np.exp(2j * np.pi * (k + 0.5) / count)


def _check_nodes(nodes):
    scale = max(1.0, float(np.max(np.abs(nodes)))) if nodes.size else 1.0
    if nodes.size > 1:
        gaps = np.abs(nodes[:, None] - nodes[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() <= 1e-12 * scale:
            i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
            raise DuplicateNodes(nodes=[complex(nodes[i]), complex(nodes[j])])
    return scale


def interpolate_coefficients(nodes, values):
    """
    Coefficients of the interpolating polynomials.

    ``values`` holds one row per node; a 2-D array interpolates every column
    at once and returns a ``(len(nodes), columns)`` coefficient matrix.
    """
    nodes = np.asarray(nodes, dtype=complex).ravel()
    values = np.asarray(values, dtype=complex)
    if values.shape[0] != nodes.size:
        raise ValueError("Need exactly one value per node.")
    scale = _check_nodes(nodes)
    vander = npoly.polyvander(nodes / scale, nodes.size - 1)
    coeffs = np.linalg.solve(vander, values)
    powers = float(scale) ** -np.arange(nodes.size)
    if coeffs.ndim == 2:
        return coeffs * powers[:, None]
    return coeffs * powers


def interpolate(nodes, values):
    """Polynomial ``p`` of degree < len(nodes) with ``p(nodes[i]) = values[i]``."""
    return Polynomial(interpolate_coefficients(nodes, np.asarray(values, dtype=complex).ravel()))


def _flat_at(p, center, count, tol):
    """Whether ``p`` looks like it has a zero of order ``count`` at ``center``."""
    rho = max(1.0, abs(center))
    weight = float(np.sum(np.abs(p.coeffs) * rho ** np.arange(len(p.coeffs))))
    taylor = np.abs(p.taylor(center, count)) * rho ** np.arange(count)
    return bool(taylor.max() <= tol * weight)


def roots_with_multiplicity(p, cluster_tol=None):
    """
    Roots of ``p`` with multiplicities.

    Computed roots are merged agglomeratively, closest pair first. A pair
    merges when the centroids are within ``cluster_tol * max(1, |c|)`` or
    when ``p`` is flat to the combined order at the merged centroid. The
    second test is what recovers the ``eps**(1/k)`` spread of a k-fold root.
    """
    if p.is_zero:
        raise ZeroPolynomial()
    tol = setting("TOL_CLUSTER", cluster_tol)
    if p.degree == 0:
        return RootMultiset((), tol)

    clusters = [[complex(r)] for r in npoly.polyroots(p.coeffs)]
    while len(clusters) > 1:
        centroids = np.array([np.mean(c) for c in clusters])
        gaps = np.abs(centroids[:, None] - centroids[None, :])
        pairs = sorted(
            (gaps[i, j], i, j)
            for i in range(len(clusters))
            for j in range(i + 1, len(clusters))
        )
        for gap, i, j in pairs:
            merged = clusters[i] + clusters[j]
            center = complex(np.mean(merged))
            if gap <= tol * max(1.0, abs(center)) or _flat_at(p, center, len(merged), tol):
                clusters = [c for k, c in enumerate(clusters) if k not in (i, j)]
                clusters.append(merged)
                break
        else:
            break

    roots = sorted(
        ((complex(np.mean(c)), len(c)) for c in clusters),
        key=lambda item: (round(item[0].real, 12), round(item[0].imag, 12)),
    )
    logger.debug("roots of degree-%d polynomial: %s", p.degree, roots)
    return RootMultiset(tuple(roots), tol)


def poly_from_roots(roots, leading=1.0):
    """``leading * prod (s - mu)**m`` over the finite roots."""
    expanded = [
        value
        for value, mult in roots
        if math.isfinite(abs(value))
        for _ in range(mult)
    ]
    if not expanded:
        return Polynomial.constant(leading)
    return Polynomial(npoly.polyfromroots(expanded) * leading)
