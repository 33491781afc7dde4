# apps/pencils/rank_one.py
"""
Structured rank-one pencils ``sF - G``.

A pencil of rank one is always one of

    left vector   (su + v) w*
    right vector  w (su* + v*)
    degenerate    (alpha s - beta) u w*      (both of the above at once)

``decompose`` recovers that structure from ``(F, G)`` using dominant
singular triplets. ``w`` is normalized to unit length and its first nonzero
entry is made positive real, so real input gives real factors.
"""

import logging
from dataclasses import dataclass

import numpy as np
from django.db import models

from .core import INFINITY, Pencil, format_point
from .exceptions import InvalidRankOne, NotDegenerate, NotRankOne
from .spectral import eig_structure

logger = logging.getLogger(__name__)

RANK_ONE_TOL = 1e-10


class RankOneForm(models.TextChoices):
    LEFT_VECTOR = "left_vector", "(su + v)w*"
    RIGHT_VECTOR = "right_vector", "w(su* + v*)"
    DEGENERATE = "degenerate", "(alpha s - beta)uw*"


def _vector(x, n=None):
    out = np.zeros(n, dtype=complex) if x is None else np.asarray(x, dtype=complex).ravel().copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class RankOnePencil:
    form: RankOneForm
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    alpha: complex = 0.0
    beta: complex = 0.0

    def __post_init__(self):
        n = np.asarray(self.w).size
        object.__setattr__(self, "form", RankOneForm(self.form))
        for name in ("u", "v", "w"):
            object.__setattr__(self, name, _vector(getattr(self, name), n))
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        self._validate()

    def _validate(self):
        if not (self.u.size == self.v.size == self.w.size):
            raise InvalidRankOne("u, v and w must have the same length.")
        if not np.any(self.w):
            raise InvalidRankOne("w must be nonzero.")
        if self.form == RankOneForm.DEGENERATE:
            if not np.any(self.u):
                raise InvalidRankOne("u must be nonzero.")
            if self.alpha == 0 and self.beta == 0:
                raise InvalidRankOne("(alpha, beta) must not both vanish.")
        elif not (np.any(self.u) or np.any(self.v)):
            raise InvalidRankOne("u and v must not both vanish.")

    @classmethod
    def left(cls, u, v, w):
        return cls(RankOneForm.LEFT_VECTOR, u, v, w)

    @classmethod
    def right(cls, u, v, w):
        return cls(RankOneForm.RIGHT_VECTOR, u, v, w)

    @classmethod
    def degenerate(cls, alpha, beta, u, w):
        return cls(RankOneForm.DEGENERATE, u, None, w, alpha, beta)

    @property
    def n(self):
        return self.w.size

    @property
    def is_real(self):
        parts = (self.u, self.v, self.w, np.array([self.alpha, self.beta]))
        return not any(np.any(p.imag) for p in parts)

    @property
    def ratio(self):
        """``beta / alpha`` of the degenerate form, infinity when alpha is 0."""
        return INFINITY if self.alpha == 0 else self.beta / self.alpha

    def negated(self):
        if self.form == RankOneForm.DEGENERATE:
            return RankOnePencil.degenerate(-self.alpha, -self.beta, self.u, self.w)
        return RankOnePencil(self.form, -self.u, -self.v, self.w)

    def __call__(self, s):
        pencil = materialize(self)
        return s * pencil.E - pencil.A


def materialize(P1):
    """The pencil ``sF - G`` as an ``(F, G)`` pair."""
    u, v, w = P1.u, P1.v, P1.w
    if P1.form == RankOneForm.LEFT_VECTOR:
        F, G = np.outer(u, w.conj()), -np.outer(v, w.conj())
    elif P1.form == RankOneForm.RIGHT_VECTOR:
        F, G = np.outer(w, u.conj()), -np.outer(w, v.conj())
    else:
        F, G = P1.alpha * np.outer(u, w.conj()), P1.beta * np.outer(u, w.conj())
    return Pencil(F, G)


def perturbed(A, P1):
    """``A + P`` as a pencil."""
    return A + materialize(P1)


def _has_rank_one(matrix, tol):
    sv = np.linalg.svd(matrix, compute_uv=False)
    return sv[0] > 0 and (sv.size < 2 or sv[1] <= tol * sv[0])


def _phase(x, tol):
    k = np.flatnonzero(np.abs(x) > tol * np.linalg.norm(x))[0]
    return x[k] / abs(x[k])


def decompose(F, G, tol=RANK_ONE_TOL):
    """
    Structured factors of a rank-one pencil ``sF - G``.

    The pencil rank is checked at ``s = 0, 1, 2``; a nonzero 2x2 minor
    (a polynomial of degree 2) cannot vanish at all three.
    """
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if not (np.any(F) or np.any(G)):
        raise NotRankOne("Both F and G vanish.")
    if not (np.any(F.imag) or np.any(G.imag)):
        F, G = F.real, G.real
    n = F.shape[0]
    for s in (0.0, 1.0, 2.0):
        sample = s * F - G
        if np.any(sample) and not _has_rank_one(sample, tol):
            raise NotRankOne(sample=s)

    stacked = np.vstack([F, G])
    side_by_side = np.hstack([F, G])
    column_rank_one = _has_rank_one(stacked, tol)
    row_rank_one = _has_rank_one(side_by_side, tol)

    if column_rank_one and row_rank_one:
        x = np.linalg.svd(side_by_side)[0][:, 0]
        y = np.linalg.svd(stacked)[2][0].conj()
        alpha = x.conj() @ F @ y
        beta = x.conj() @ G @ y
        pu, pw = _phase(x, tol), _phase(y, tol)
        u, w = x / pu, y / pw
        scale = pu * np.conj(pw)
        result = RankOnePencil.degenerate(alpha * scale, beta * scale, u, w)
    elif column_rank_one:
        w = np.linalg.svd(stacked)[2][0].conj()
        x = stacked @ w
        ph = _phase(w, tol)
        w, x = w / ph, x * np.conj(ph)
        result = RankOnePencil.left(x[:n], -x[n:], w)
    elif row_rank_one:
        w = np.linalg.svd(side_by_side)[0][:, 0]
        y = side_by_side.conj().T @ w
        ph = _phase(w, tol)
        w, y = w / ph, y * np.conj(ph)
        result = RankOnePencil.right(y[:n], -y[n:], w)
    else:
        raise NotRankOne("Neither [F; G] nor [F, G] has rank one.")
    logger.debug("decomposed rank-one pencil as %s", result.form.label)
    return result


class RegularityKind(models.TextChoices):
    REGULAR_GUARANTEED = "regular_guaranteed", "Regular guaranteed"
    SHARED_EIGENVALUE = "shared_eigenvalue", "Shared eigenvalue"


@dataclass(frozen=True)
class RegularityVerdict:
    kind: RegularityKind
    eigenvalue: complex | None = None

    def __str__(self):
        if self.kind == RegularityKind.SHARED_EIGENVALUE:
            return f"{self.kind.label} {format_point(self.eigenvalue)}"
        return self.kind.label


def degenerate_regularity_check(A, P1, sd=None):
    """
    For ``P = (alpha s - beta) u w*``: ``A + P`` is regular when
    ``beta / alpha`` is not an eigenvalue of ``A``. Otherwise that point
    stays in the spectrum of ``A + P``.
    """
    if P1.form != RankOneForm.DEGENERATE:
        raise NotDegenerate(form=P1.form.value)
    sd = sd or eig_structure(A)
    point = P1.ratio
    if sd.contains(point):
        return RegularityVerdict(RegularityKind.SHARED_EIGENVALUE, point)
    return RegularityVerdict(RegularityKind.REGULAR_GUARANTEED)
