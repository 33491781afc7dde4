# apps/placement/placement.py
"""
Eigenvalue placement by a rank-one pencil ``P(s) = (s - beta) u v*``.

With ``q_gamma = gamma * prod (s - mu_i)**m_i`` the determinant identity

    det(A + P)(s) * m_A(s) = det(sE - A) * q_gamma(s)

holds as soon as ``v* m_A(s) (sE - A)^{-1} u = (q_gamma - m_A) / (s - beta)``.
That polynomial equation is linear in ``u`` once ``v`` is fixed, and it is
solved in Weierstrass coordinates, where the resolvent is block diagonal.
"""

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import block_diag

from apps.pencils.conf import setting
from apps.pencils.core import Pencil, evaluate, format_point, is_infinite, is_regular, same_point
from apps.pencils.exceptions import (
    BudgetMismatch,
    DegreeTooHigh,
    InvalidTargets,
    NotRegular,
    NumericallySingular,
    PencilError,
    PreconditionViolated,
    TotalMismatch,
    VerificationFailed,
)
from apps.pencils.poly import Polynomial, default_nodes, interpolate, interpolate_coefficients, poly_from_roots
from apps.pencils.rank_one import RankOnePencil, perturbed
from apps.pencils.spectral import eig_structure, jordan_block, numerical_rank, weierstrass

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlacementSpec:
    """A target multiset ``{(mu_i, m_i)}``; infinity is ``complex(inf, 0)``."""

    targets: tuple
    budget: int | None = None

    def __post_init__(self):
        targets = tuple((complex(mu), int(m)) for mu, m in self.targets)
        if any(m < 1 for _, m in targets):
            raise InvalidTargets("Multiplicities must be positive.", targets=list(targets))
        for i, (mu, _) in enumerate(targets):
            if any(same_point(mu, other, 1e-12) for other, _ in targets[i + 1 :]):
                raise InvalidTargets(f"Target {format_point(mu)} is listed twice.")
        object.__setattr__(self, "targets", targets)
        if self.budget is not None and self.total != self.budget:
            raise BudgetMismatch(
                f"Target multiplicities sum to {self.total} but the budget is {self.budget}.",
                expected=self.budget,
                got=self.total,
            )

    @property
    def total(self):
        return sum(m for _, m in self.targets)

    @property
    def finite(self):
        return tuple((mu, m) for mu, m in self.targets if not is_infinite(mu))

    @property
    def infinite_multiplicity(self):
        return sum(m for mu, m in self.targets if is_infinite(mu))

    def multiplicity(self, lam, tol=None):
        tol = setting("TOL_MATCH", tol)
        return next((m for mu, m in self.targets if same_point(mu, lam, tol)), 0)

    def is_conjugate_symmetric(self, tol=1e-12):
        for mu, m in self.finite:
            if abs(mu.imag) > tol * max(1.0, abs(mu)) and self.multiplicity(mu.conjugate(), tol) != m:
                return False
        return True

    def with_budget(self, budget):
        return PlacementSpec(self.targets, budget)

    def __str__(self):
        return ", ".join(f"{format_point(mu)}:{m}" for mu, m in self.targets)


@dataclass(frozen=True, eq=False)
class PlacementResult:
    perturbation: RankOnePencil | None
    gamma: complex
    q_gamma: Polynomial
    achieved: object
    verified: bool
    predicted: tuple
    alpha: complex | None = None
    beta: complex | None = None
    residual: float = 0.0
    det_residual: float = 0.0
    w: np.ndarray | None = None
    v: np.ndarray | None = None
    messages: tuple = field(default_factory=tuple)


class ThetaSolution(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    residual: float


def predicted_spectrum(sd, spec, order_of):
    """
    Root subspace dimensions the construction must produce.

    An old eigenvalue keeps ``dim L - order_of(eig)`` plus its target
    multiplicity; targets outside the old spectrum get their multiplicity.
    """
    out = []
    for eig in sd.eigs:
        dim = eig.root_dim - order_of(eig) + spec.multiplicity(eig.lam)
        if dim > 0:
            out.append((eig.lam, dim))
    out.extend((mu, m) for mu, m in spec.targets if not sd.contains(mu))
    return tuple(out)


def verify_spectrum(B, predicted, tol_rank=None, cluster_tol=None):
    """Measures ``B`` and compares against ``predicted`` as integers."""
    messages = []
    try:
        achieved = eig_structure(B, tol_rank, cluster_tol)
    except PencilError as exc:
        return None, [f"spectral analysis of the perturbed pencil failed: {exc}"]
    for lam, dim in predicted:
        eig = achieved.find(lam)
        if eig is None:
            messages.append(f"expected eigenvalue {format_point(lam)} is missing")
        elif eig.root_dim != dim:
            messages.append(f"eigenvalue {format_point(lam)} has dimension {eig.root_dim}, expected {dim}")
    tol = setting("TOL_MATCH")
    for eig in achieved.eigs:
        if not any(same_point(eig.lam, lam, tol) for lam, _ in predicted):
            messages.append(f"unexpected eigenvalue {format_point(eig.lam)}")
    return achieved, messages


def det_identity_residual(A, B, left, right, rng, count=None, radius=1.0):
    """
    Worst relative gap of ``det B(s) * left(s) = det A(s) * right(s)`` over
    random sample points.
    """
    count = setting("DET_SAMPLES", count)
    worst = 0.0
    for _ in range(count):
        s = radius * complex(rng.standard_normal(), rng.standard_normal())
        lhs = np.linalg.det(evaluate(B, s)) * left(s)
        rhs = np.linalg.det(evaluate(A, s)) * right(s)
        scale = max(abs(lhs), abs(rhs), np.finfo(float).tiny)
        worst = max(worst, float(abs(lhs - rhs) / scale))
    return worst


def theta(P, sd, u, v):
    """``v* m_A(s) (sE - A)^{-1} u`` as a polynomial of degree below ``M(A)``."""
    nodes = default_nodes(max(sd.M, 1), sd.sample_radius)
    values = [np.vdot(v, sd.m_A(s) * np.linalg.solve(evaluate(P, s), u)) for s in nodes]
    return interpolate(nodes, values)


def leading_row_selector(wf):
    """``v_hat`` with a one on the first row of the longest block of each eigenvalue."""
    v_hat = np.zeros(wf.n, dtype=complex)
    for block in wf.blocks:
        if block.leading:
            v_hat[block.offset] = 1.0
    return v_hat


def solve_theta(sd, wf, p, fixed_v=None, real_mode=False, tol_rank=None):
    """
    ``u, v`` with ``v* m_A(s) (sE - A)^{-1} u = p(s)``.

    In Weierstrass coordinates ``u_hat = S u`` and ``v_hat = T* v``; the
    map ``u_hat -> theta`` is sampled on a circle outside the spectrum,
    interpolated to an ``M x n`` coefficient matrix and solved in the
    least-squares sense.
    """
    M = sd.M
    if p.degree > M - 1:
        raise DegreeTooHigh(degree=p.degree, limit=M - 1)
    if real_mode and not (wf.real_form and p.is_real):
        raise PreconditionViolated("Real mode needs the real Weierstrass form and a real target.")

    if fixed_v is None:
        v_hat = leading_row_selector(wf)
        v = np.linalg.solve(wf.T.conj().T, v_hat)
    else:
        v = np.asarray(fixed_v, dtype=complex)
        v_hat = wf.T.conj().T @ v

    E_w, A_w = wf.E_w, wf.A_w
    nodes = default_nodes(M, sd.sample_radius)
    rows = [
        sd.m_A(s) * np.linalg.solve((s * E_w - A_w).conj().T, v_hat).conj()
        for s in nodes
    ]
    C = interpolate_coefficients(nodes, np.array(rows))
    b = p.padded(M)
    if real_mode:
        C, b = C.real, b.real
    rank = numerical_rank(C.T, tol_rank)
    if rank < M:
        raise NumericallySingular(rank=rank, expected=M)
    u_hat = np.linalg.lstsq(C, b, rcond=None)[0]
    residual = float(np.max(np.abs(C @ u_hat - b)))
    if residual > setting("TOL_RESIDUAL") * max(1.0, float(np.max(np.abs(b)))):
        raise NumericallySingular("Theta equation left a residual.", residual=residual)
    u = np.linalg.solve(wf.S, u_hat.astype(complex))
    if real_mode:
        u, v = u.real.astype(complex), v.real.astype(complex)
    return ThetaSolution(u, v, residual)


def _choose_beta(sd, spec, cluster_tol, attempts=60):
    """
    First point of the ladder ``base, 2 base, 4 base, ...`` that is clear of
    targets and eigenvalues and gives ``|gamma|`` in ``[1e-12, 1e12]``.
    """
    cluster_tol = setting("TOL_CLUSTER", cluster_tol)
    finite_targets = spec.finite
    avoid = [mu for mu, _ in finite_targets] + [eig.lam for eig in sd.finite]
    beta = 1.0 + max((abs(mu) for mu, _ in finite_targets), default=0.0) + sd.radius
    for _ in range(attempts):
        clear = all(abs(beta - p) > cluster_tol * max(1.0, abs(p)) for p in avoid)
        denominator = np.prod([(beta - mu) ** m for mu, m in finite_targets]) if finite_targets else 1.0
        gamma = complex(sd.m_A(beta) / denominator)
        if clear and 1e-12 <= abs(gamma) <= 1e12:
            return beta, gamma
        logger.debug("beta=%.6g rejected (|gamma|=%.3g)", beta, abs(gamma))
        beta *= 2.0
    raise NumericallySingular("No admissible beta on the candidate ladder.")


def place(A, spec, real_mode=False, seed=None, tol_rank=None, cluster_tol=None, sd=None):
    """
    Rank-one ``P(s) = (s - beta) u v*`` with ``sigma(A + P)`` equal to the
    targets plus the eigenvalues of ``A`` that carry two or more chains.

    The result is always verified; a failed check raises
    :class:`VerificationFailed` carrying the constructed result.
    """
    if not is_regular(A):
        raise NotRegular()
    sd = sd or eig_structure(A, tol_rank, cluster_tol)
    spec = spec.with_budget(sd.M)
    if real_mode and not (A.is_real and spec.is_conjugate_symmetric()):
        raise PreconditionViolated("Real placement needs a real pencil and conjugate-symmetric targets.")
    wf = weierstrass(A, real_form=real_mode, tol_rank=tol_rank, sd=sd)

    beta, gamma = _choose_beta(sd, spec, cluster_tol)
    q_gamma = poly_from_roots(spec.finite, leading=gamma)
    if real_mode:
        gamma, q_gamma = complex(gamma.real), q_gamma.real()
    quotient, remainder = (q_gamma - sd.m_A).divide_linear(beta)
    if abs(remainder) > 1e-9 * max(q_gamma.norm_inf, sd.m_A.norm_inf):
        raise NumericallySingular("q_gamma - m_A does not vanish at beta.", remainder=abs(remainder))
    if real_mode:
        quotient = quotient.real()

    u, v, residual = solve_theta(sd, wf, quotient, real_mode=real_mode, tol_rank=tol_rank)
    # a target equal to the current spectrum leaves u at rounding level
    negligible = np.linalg.norm(u) * np.linalg.norm(v) <= 1e-12 * max(1.0, q_gamma.norm_inf)
    P1 = None if negligible else RankOnePencil.degenerate(1.0, beta, u, v)
    B = perturbed(A, P1) if P1 else A

    rng = np.random.default_rng(setting("SEED", seed))
    predicted = predicted_spectrum(sd, spec, lambda eig: eig.m1)
    det_residual = det_identity_residual(A, B, sd.m_A, q_gamma, rng, radius=1.0 + sd.radius)
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
        alpha=1.0,
        beta=beta,
        residual=residual,
        det_residual=det_residual,
        messages=tuple(messages),
    )
    if messages:
        logger.warning("placement of %s failed verification: %s", spec, "; ".join(messages))
        raise VerificationFailed("; ".join(messages), result=result)
    logger.info("placed %s with beta=%.6g, gamma=%.6g", spec, beta, abs(gamma))
    return result


def place_single_chain(A, spec, **kwargs):
    """``place`` for pencils with one chain per eigenvalue; every target then gets one chain."""
    sd = kwargs.pop("sd", None) or eig_structure(A, kwargs.get("tol_rank"), kwargs.get("cluster_tol"))
    crowded = [format_point(eig.lam) for eig in sd.eigs if eig.geometric >= 2]
    if crowded:
        raise PreconditionViolated(
            f"Eigenvalues {', '.join(crowded)} carry more than one Jordan chain.", eigenvalues=crowded
        )
    result = place(A, spec, sd=sd, **kwargs)
    for mu, _ in spec.targets:
        eig = result.achieved.find(mu)
        if eig is None or eig.geometric != 1:
            raise VerificationFailed(f"Target {format_point(mu)} did not end up with a single chain.", result=result)
    return result


class InverseProblem(NamedTuple):
    pencil: Pencil
    perturbation: RankOnePencil | None
    result: PlacementResult


def single_chain_pencil(spec):
    """``diag(I, N) s - diag(J, I)`` with one Jordan block per listed value."""
    finite = [jordan_block(mu, m) for mu, m in spec.finite]
    size_inf = spec.infinite_multiplicity
    r = sum(m for _, m in spec.finite)
    J = block_diag(*finite) if finite else np.zeros((0, 0))
    N = jordan_block(0.0, size_inf) if size_inf else np.zeros((0, 0))
    E = block_diag(np.eye(r), N)
    A = block_diag(J, np.eye(size_inf))
    return Pencil(E, A)


def inverse_construct(before, after, **kwargs):
    """
    A pencil with spectrum ``before`` and a rank-one ``P`` moving it to ``after``.

    When ``after`` equals ``before`` nothing has to move and ``perturbation``
    is ``None``; ``result`` still carries the verified spectrum.
    """
    before = before if isinstance(before, PlacementSpec) else PlacementSpec(before)
    after = after if isinstance(after, PlacementSpec) else PlacementSpec(after)
    if before.total != after.total:
        raise TotalMismatch(before=before.total, after=after.total)
    pencil = single_chain_pencil(before)
    result = place_single_chain(pencil, after, **kwargs)
    return InverseProblem(pencil, result.perturbation, result)
