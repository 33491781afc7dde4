# apps/placement/feedback.py
"""
Single-input descriptor systems ``d/dt Ex = Ax + bu``.

State feedback ``u = f* x`` turns the pencil into ``sE - (A + b f*)``, which
is the restricted perturbation with ``u = 0`` and ``v = -b``. For real
systems ``f* = f^T``.
"""

import logging
from dataclasses import dataclass

import numpy as np

from apps.pencils.core import Pencil, format_point, is_infinite, is_regular
from apps.pencils.exceptions import InfinityForbidden, NotRegular, ShapeMismatch
from apps.pencils.spectral import eig_structure, numerical_rank

from .restricted import pole_profile, solve_w

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DaeSystem:
    E: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        pencil = Pencil(self.E, self.A)
        b = np.asarray(self.b, dtype=complex).ravel()
        if b.size != pencil.n:
            raise ShapeMismatch(f"b has {b.size} entries, expected {pencil.n}.")
        if not is_regular(pencil):
            raise NotRegular("sE - A is singular.")
        b.setflags(write=False)
        object.__setattr__(self, "E", pencil.E)
        object.__setattr__(self, "A", pencil.A)
        object.__setattr__(self, "b", b)

    @property
    def pencil(self):
        return Pencil(self.E, self.A)

    @property
    def n(self):
        return self.b.size

    @property
    def is_real(self):
        return self.pencil.is_real and not np.any(self.b.imag)

    def closed_loop(self, f):
        """``sE - (A + b f*)``."""
        return Pencil(self.E, self.A + np.outer(self.b, np.conj(f)))


@dataclass(frozen=True)
class HautusVerdict:
    controllable: bool
    witness: complex | None
    characterization: bool

    @property
    def agrees(self):
        return self.controllable == self.characterization

    def __bool__(self):
        return self.controllable

    def __str__(self):
        if self.controllable:
            return "controllable"
        return f"not controllable at {format_point(self.witness)}"


def hautus_controllable(system, tol_rank=None, sd=None):
    """
    Rank of ``[lam E - A, b]`` at every finite eigenvalue, and independently
    whether every finite eigenvalue has one chain whose full length is
    reached by the pole order of ``(sE - A)^{-1} b``.
    """
    pencil = system.pencil
    sd = sd or eig_structure(pencil, tol_rank)
    witness = None
    for eig in sd.finite:
        compound = np.column_stack([eig.lam * system.E - system.A, system.b])
        if numerical_rank(compound, tol_rank) < system.n:
            witness = eig.lam
            break

    profile = pole_profile(pencil, None, -system.b, sd)
    characterization = all(
        eig.geometric == 1 and profile.order(eig.lam) == eig.m1 == eig.root_dim for eig in sd.finite
    )
    verdict = HautusVerdict(witness is None, witness, characterization)
    if not verdict.agrees:
        logger.warning("rank test and pole orders disagree: %s vs %s", verdict.controllable, characterization)
    return verdict


def place_feedback(system, spec, real_mode=None, **kwargs):
    """
    Feedback ``f`` with ``sigma(sE - (A + b f*))`` at the targets plus the
    eigenvalues the input cannot reach.

    Returns ``(f, result)``. ``real_mode=None`` picks real arithmetic when
    the system is real and the targets are closed under conjugation.
    """
    pencil = system.pencil
    sd = kwargs.pop("sd", None) or eig_structure(pencil, kwargs.get("tol_rank"), kwargs.get("cluster_tol"))
    if sd.infinite is None and any(is_infinite(mu) for mu, _ in spec.targets):
        raise InfinityForbidden("E is invertible; infinity cannot be a closed-loop eigenvalue.")
    if real_mode is None:
        real_mode = system.is_real and spec.is_conjugate_symmetric()
    result = solve_w(pencil, None, -system.b, spec, real_mode=real_mode, sd=sd, **kwargs)
    logger.info("feedback placed %s", spec)
    return result.w, result
