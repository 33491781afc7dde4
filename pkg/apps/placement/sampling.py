# apps/placement/sampling.py
"""Seeded random instances: small integer pencils, rank-one pencils and target multisets."""

import numpy as np

from apps.pencils.core import INFINITY, Pencil, is_regular
from apps.pencils.rank_one import RankOneForm, RankOnePencil

from .placement import PlacementSpec


def integer_matrix(rng, n, bound=3):
    return rng.integers(-bound, bound + 1, size=(n, n)).astype(float)


def integer_vector(rng, n, bound=3, nonzero=True):
    while True:
        x = rng.integers(-bound, bound + 1, size=n).astype(complex)
        if np.any(x) or not nonzero:
            return x


def integer_pencil(rng, n, bound=3, singular_probability=0.3):
    """
    Regular ``sE - A`` with integer entries. With ``singular_probability``
    some rows of ``E`` are zeroed so infinity shows up in the spectrum.
    """
    while True:
        E = integer_matrix(rng, n, bound)
        A = integer_matrix(rng, n, bound)
        if rng.random() < singular_probability:
            rows = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
            E[rows] = 0.0
        pencil = Pencil(E, A)
        if is_regular(pencil):
            return pencil


def integer_rank_one(rng, n, bound=3, form=None):
    form = RankOneForm(form) if form else rng.choice(list(RankOneForm))
    w = integer_vector(rng, n, bound)
    if form == RankOneForm.DEGENERATE:
        alpha, beta = 0, 0
        while alpha == 0 and beta == 0:
            alpha, beta = (int(x) for x in rng.integers(-bound, bound + 1, size=2))
        return RankOnePencil.degenerate(alpha, beta, integer_vector(rng, n, bound), w)
    while True:
        u = integer_vector(rng, n, bound, nonzero=False)
        v = integer_vector(rng, n, bound, nonzero=False)
        if np.any(u) or np.any(v):
            return RankOnePencil(form, u, v, w)


def random_targets(
    rng,
    budget,
    infinity_probability=0.3,
    conjugate_symmetric=False,
    complex_probability=0.3,
    bound=5,
):
    """A target multiset with multiplicities summing to ``budget``."""
    targets = {}
    remaining = budget
    if remaining and rng.random() < infinity_probability:
        m = int(rng.integers(1, remaining + 1))
        targets[INFINITY] = m
        remaining -= m
    while remaining:
        m = int(rng.integers(1, remaining + 1))
        mu = complex(int(rng.integers(-bound, bound + 1)), 0)
        if rng.random() < complex_probability:
            mu += 1j * int(rng.integers(1, bound + 1))
            if conjugate_symmetric:
                if 2 * m > remaining:
                    continue
                if mu in targets or mu.conjugate() in targets:
                    continue
                targets[mu] = targets[mu.conjugate()] = m
                remaining -= 2 * m
                continue
        if mu in targets:
            continue
        targets[mu] = m
        remaining -= m
    return PlacementSpec(tuple(targets.items()), budget)
