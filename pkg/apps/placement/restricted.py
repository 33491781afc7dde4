# apps/placement/restricted.py
"""
Placement with a prescribed direction: ``P(s) = (su + v) w*`` for fixed
``u, v`` and a free ``w``.

How much of the spectrum can move is governed by the pole orders of
``s -> (sE - A)^{-1} (su + v)``. They are read off the vector polynomial
``h(s) = m_A(s) (sE - A)^{-1} (su + v)`` by repeated synthetic division.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from apps.pencils.conf import setting
from apps.pencils.core import INFINITY, Pencil, dualize, evaluate, format_point, is_regular, same_point
from apps.pencils.exceptions import (
    HypothesisViolated,
    NotRegular,
    NumericallySingular,
    PreconditionViolated,
    VerificationFailed,
)
from apps.pencils.poly import Polynomial, default_nodes, interpolate_coefficients, poly_from_roots
from apps.pencils.rank_one import RankOnePencil
from apps.pencils.spectral import eig_structure, weierstrass

from .bounds import BoundsReport, root_dim_records
from .placement import PlacementResult, det_identity_residual, predicted_spectrum, verify_spectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PoleProfile:
    orders: tuple
    M_uv: int
    m_tilde: Polynomial

    def order(self, lam, tol=None):
        tol = setting("TOL_MATCH", tol)
        return next((order for point, order in self.orders if same_point(point, lam, tol)), 0)


def _vectors(n, *vectors):
    return [np.zeros(n, dtype=complex) if x is None else np.asarray(x, dtype=complex).ravel() for x in vectors]


def _finite_orders(P, sd, u, v, eigs):
    if not (np.any(u) or np.any(v)):
        return [(eig.lam, 0) for eig in eigs]
    nodes = default_nodes(sd.M + 1, sd.sample_radius)
    values = np.array([sd.m_A(s) * np.linalg.solve(evaluate(P, s), s * u + v) for s in nodes])
    H = interpolate_coefficients(nodes, values)
    threshold = 1e-8 * float(np.max(np.abs(H)))
    entries = [Polynomial(H[:, i]) for i in range(H.shape[1])]
    orders = []
    for eig in eigs:
        vanishing = min(h.vanishing_order(eig.lam, threshold, cap=eig.m1) for h in entries)
        orders.append((eig.lam, eig.m1 - vanishing))
    return orders


def pole_profile(A, u, v, sd=None):
    """Pole order of ``(sE - A)^{-1}(su + v)`` at every eigenvalue; infinity via the dual at 0."""
    sd = sd or eig_structure(A)
    u, v = _vectors(A.n, u, v)
    orders = _finite_orders(A, sd, u, v, sd.finite)
    if sd.infinite:
        dual = dualize(A)
        sd_dual = eig_structure(dual)
        # the clustered zero of the dual need not sit within TOL_MATCH of 0
        zero = min(sd_dual.finite, key=lambda eig: abs(eig.lam))
        ((_, order),) = _finite_orders(dual, sd_dual, v, u, [zero])
        orders.append((INFINITY, order))
    m_tilde = poly_from_roots([(lam, order) for lam, order in orders if lam != INFINITY])
    if A.is_real and not (np.any(u.imag) or np.any(v.imag)):
        m_tilde = m_tilde.real()
    return PoleProfile(tuple(orders), sum(order for _, order in orders), m_tilde)


def spectrum_floor(A, u, v, sd=None, profile=None):
    """Eigenvalues of ``A`` that survive every choice of ``w``."""
    sd = sd or eig_structure(A)
    profile = profile or pole_profile(A, u, v, sd)
    return tuple(
        eig.lam for eig in sd.eigs if eig.geometric >= 2 or profile.order(eig.lam) < eig.m1
    )


def _restricted_pencil(u, v, w):
    return Pencil(np.outer(u, w.conj()), -np.outer(v, w.conj()))


def check_restricted_bounds(A, u, v, w):
    """Root subspace bounds for ``P = (su + v) w*`` measured against ``M(A, u, v)``."""
    u, v, w = _vectors(A.n, u, v, w)
    B = A + _restricted_pencil(u, v, w)
    for name, pencil in (("A", A), ("A + P", B)):
        if not is_regular(pencil):
            raise NotRegular(f"The pencil {name} is singular.")
    sdA = eig_structure(A)
    profile = pole_profile(A, u, v, sdA)
    records = root_dim_records(
        A, B, sdA, eig_structure(B), lambda eig: profile.order(eig.lam), profile.M_uv
    )
    return BoundsReport("restricted", tuple(records))


def dependent_point(u, v, tol=1e-10):
    """``mu`` with ``v = -mu u`` when ``u != 0`` and the two are parallel, else ``None``."""
    if not np.any(u):
        return None
    mu = -np.vdot(u, v) / np.vdot(u, u)
    if np.linalg.norm(v + mu * u) <= tol * max(np.linalg.norm(u), np.linalg.norm(v)):
        return complex(mu)
    return None


def _target_scale(sd, profile, spec, u, v):
    """
    ``gamma`` for the target ``gamma * prod (s - mu_i)**m_i - m_tilde``.

    Returns ``(gamma, pinned)``. For ``v = -mu u`` with ``mu`` outside the
    spectrum ``P`` vanishes at ``mu``, so ``det`` cannot change there and
    ``gamma`` is fixed by that; ``mu`` itself is then unreachable. For
    ``u = 0`` the leading part of ``E`` is untouched and infinity cannot
    appear when ``E`` is invertible.
    """
    if not np.any(u):
        if sd.infinite is None and spec.infinite_multiplicity:
            raise HypothesisViolated("With u = 0 and E invertible infinity cannot be placed.")
        return 1.0, False
    mu = dependent_point(u, v)
    if mu is None or sd.contains(mu):
        return 1.0, False
    if spec.multiplicity(mu):
        raise HypothesisViolated(
            f"v = -{format_point(mu)} u with {format_point(mu)} outside the spectrum; "
            f"{format_point(mu)} cannot be a target.",
            mu=mu,
        )
    finite = spec.finite
    denominator = np.prod([(mu - target) ** m for target, m in finite]) if finite else 1.0
    return complex(profile.m_tilde(mu) / denominator), True


def w_map(A, sd, profile, u, v):
    """
    Coefficient matrix of ``x -> m_tilde(s) x^T (sE - A)^{-1} (su + v)``,
    where ``x = conj(w)``: ``M(A, u, v) + 1`` rows, one per coefficient.
    """
    nodes = default_nodes(profile.M_uv + 1, sd.sample_radius)
    rows = [profile.m_tilde(s) * np.linalg.solve(evaluate(A, s), s * u + v) for s in nodes]
    return interpolate_coefficients(nodes, np.array(rows))


def _least_squares(C, b):
    x = np.linalg.lstsq(C, b, rcond=None)[0]
    return x, float(np.max(np.abs(C @ x - b)))


def solve_w(A, u, v, spec, real_mode=False, seed=None, tol_rank=None, cluster_tol=None, sd=None):
    """
    ``w`` such that ``A + (su + v) w*`` has the targets plus the floor set as
    its spectrum, with dimensions ``dim L - m_uv + m_i``.

    Unless ``u, v`` pin ``gamma``, a target out of reach at ``gamma = 1`` is
    retried with ``gamma`` fitted jointly with ``w``; the result reports the
    fitted value.
    """
    if not is_regular(A):
        raise NotRegular()
    u, v = _vectors(A.n, u, v)
    if not (np.any(u) or np.any(v)):
        raise PreconditionViolated("u and v both vanish; there is nothing to place.")
    sd = sd or eig_structure(A, tol_rank, cluster_tol)
    profile = pole_profile(A, u, v, sd)
    spec = spec.with_budget(profile.M_uv)
    if real_mode and not (
        A.is_real and not np.any(u.imag) and not np.any(v.imag) and spec.is_conjugate_symmetric()
    ):
        raise PreconditionViolated("Real placement needs real A, u, v and conjugate-symmetric targets.")

    gamma, pinned = _target_scale(sd, profile, spec, u, v)
    product = poly_from_roots(spec.finite)
    size = profile.M_uv + 1
    C = w_map(A, sd, profile, u, v)
    b = (product * gamma - profile.m_tilde).padded(size)
    if real_mode:
        C, b, gamma = C.real, b.real, complex(gamma.real)
    x, residual = _least_squares(C, b)
    tolerance = setting("TOL_RESIDUAL") * max(1.0, float(np.max(np.abs(b))))
    if residual > tolerance and not pinned:
        # the image misses the normalized target; let gamma float as well
        joint = np.column_stack([C, -product.padded(size)[:size]])
        rhs = -profile.m_tilde.padded(size)
        if real_mode:
            joint, rhs = joint.real, rhs.real
        solution, residual = _least_squares(joint, rhs)
        if abs(solution[-1]) > 1e-8:
            x, gamma = solution[:-1], complex(solution[-1])
            logger.info("restricted target rescaled by gamma=%.6g", abs(gamma))
    if residual > tolerance:
        raise NumericallySingular("No w reaches the target polynomial.", residual=residual)

    w = np.conj(x).astype(complex)
    if real_mode:
        w = w.real.astype(complex)
    P1 = RankOnePencil.left(u, v, w) if np.any(np.abs(w) > 1e-14) else None
    B = A + _restricted_pencil(u, v, w)

    q_gamma = product * gamma
    rng = np.random.default_rng(setting("SEED", seed))
    predicted = predicted_spectrum(sd, spec, lambda eig: profile.order(eig.lam))
    det_residual = det_identity_residual(A, B, profile.m_tilde, q_gamma, rng, radius=1.0 + sd.radius)
    achieved, messages = verify_spectrum(B, predicted, tol_rank, cluster_tol)
    if det_residual > 1e-7:
        messages.append(f"determinant identity off by {det_residual:.3g}")
    result = PlacementResult(
        perturbation=P1,
        gamma=gamma,
        q_gamma=q_gamma,
        achieved=achieved,
        verified=not messages,
        predicted=predicted,
        residual=residual,
        det_residual=det_residual,
        w=w,
        v=v,
        messages=tuple(messages),
    )
    if messages:
        logger.warning("restricted placement of %s failed verification: %s", spec, "; ".join(messages))
        raise VerificationFailed("; ".join(messages), result=result)
    return result


def full_pole_vector(A, sd=None, real_form=False):
    """
    ``v`` with ``m_{0,v}(lam) = m_1(lam)`` everywhere: the last row of each
    leading Jordan block, pulled back through the Weierstrass transformation.
    """
    wf = weierstrass(A, real_form=real_form, sd=sd)
    v_hat = np.zeros(A.n, dtype=complex)
    for block in wf.blocks:
        if block.leading and not block.infinite:
            v_hat[block.offset + block.width - 1] = 1.0
    v = np.linalg.solve(wf.S, v_hat)
    return v.real.astype(complex) if real_form else v


def place_matrix(A0, v=None, spec=None, real_mode=False, **kwargs):
    """
    ``w`` with ``sigma(A0 + v w*)`` at the targets. Without ``v`` one with
    full pole orders is chosen, so the whole budget ``deg m_A`` is free.
    """
    A = Pencil.from_matrix(A0)
    sd = eig_structure(A, kwargs.get("tol_rank"), kwargs.get("cluster_tol"))
    if v is None:
        v = full_pole_vector(A, sd, real_form=real_mode)
    v = np.asarray(v, dtype=complex).ravel()
    # sI - (A0 + v w*) = A(s) + (s 0 + (-v)) w*
    result = solve_w(A, None, -v, spec, real_mode=real_mode, sd=sd, **kwargs)
    return replace(result, v=v)
