# apps/pencils/spectral.py
"""
Spectral structure of regular pencils.

Every rank decision goes through :func:`numerical_nullity`. It thresholds
singular values at ``tol_rank * sigma_max * dim``. The point at infinity is
never treated separately: it is the point 0 of the dual pencil ``-sA + E``.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .conf import setting
from .core import INFINITY, char_poly, dualize, evaluate, format_point, is_infinite, is_regular, same_point
from .exceptions import IllConditioned, NotEigenvalue, NotRegular, PreconditionViolated, StructureInconsistent
from .poly import Polynomial, poly_from_roots, roots_with_multiplicity

logger = logging.getLogger(__name__)


def _threshold(singular_values, shape, tol_rank):
    return tol_rank * singular_values[0] * max(shape) if singular_values.size else 0.0


def numerical_nullity(matrix, tol_rank=None):
    """Dimension of the numerical kernel (right null space) of ``matrix``."""
    tol_rank = setting("TOL_RANK", tol_rank)
    if matrix.size == 0:
        return matrix.shape[1]
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] == 0:
        return matrix.shape[1]
    rank = int(np.count_nonzero(sv > _threshold(sv, matrix.shape, tol_rank)))
    return matrix.shape[1] - rank


def numerical_rank(matrix, tol_rank=None):
    return matrix.shape[1] - numerical_nullity(matrix, tol_rank)


def null_space_basis(matrix, tol_rank=None):
    """Orthonormal kernel basis as columns. Real input gives a real basis."""
    tol_rank = setting("TOL_RANK", tol_rank)
    if not np.any(matrix.imag):
        matrix = matrix.real
    _, sv, vh = np.linalg.svd(matrix)
    rank = int(np.count_nonzero(sv > _threshold(sv, matrix.shape, tol_rank))) if sv[0] else 0
    return vh[rank:].conj().T.astype(complex)


def chain_matrix(P, lam, k):
    """
    The ``kn x kn`` block lower bidiagonal matrix ``B_k(lam)``.

    Diagonal blocks are ``A - lam E``, subdiagonal blocks ``-E``; its kernel
    holds the Jordan chains of length ``k`` stacked as ``[g0; ...; g_{k-1}]``.
    """
    n = P.n
    diag = P.A - lam * P.E
    B = np.zeros((k * n, k * n), dtype=complex)
    for i in range(k):
        B[i * n : (i + 1) * n, i * n : (i + 1) * n] = diag
        if i:
            B[i * n : (i + 1) * n, (i - 1) * n : i * n] = -P.E
    return B


def _local(P, lam):
    """Moves a point at infinity to 0 of the dual pencil."""
    if is_infinite(lam):
        return dualize(P), 0.0
    return P, complex(lam)


def nullity_tower(P, lam, k_max, tol_rank=None, check=True):
    """
    ``[nu_1, ..., nu_kmax]`` with ``nu_k = dim L^k_lam``.

    The tower stops growing once two consecutive values agree; the rest of
    the list is filled with the final value.
    """
    if check and not is_regular(P):
        raise NotRegular()
    Q, z = _local(P, lam)
    tower = []
    for k in range(1, k_max + 1):
        nu = numerical_nullity(chain_matrix(Q, z, k), tol_rank)
        tower.append(nu)
        if nu == 0 or (k > 1 and nu == tower[-2]):
            tower.extend([nu] * (k_max - k))
            break
    return tower


def segre_from_tower(tower):
    """Chain lengths, longest first, from the layer counts ``nu_k - nu_{k-1}``."""
    counts = np.diff([0, *tower])
    if np.any(np.diff(counts) > 0) or np.any(counts < 0):
        raise StructureInconsistent(
            "Nullity tower is not concave; the rank tolerance is probably wrong.",
            tower=list(tower),
        )
    segre = []
    padded = [*counts, 0]
    for k in range(len(counts), 0, -1):
        segre.extend([k] * int(padded[k - 1] - padded[k]))
    return tuple(segre)


@dataclass(frozen=True)
class EigStructure:
    lam: complex
    segre: tuple
    root_dim: int
    nullity_tower: tuple

    @property
    def m1(self):
        return self.segre[0]

    @property
    def geometric(self):
        return len(self.segre)

    @property
    def is_infinite(self):
        return is_infinite(self.lam)

    def __str__(self):
        return f"{format_point(self.lam)}: segre={list(self.segre)} dim={self.root_dim}"


@dataclass(frozen=True, eq=False)
class SpectralData:
    eigs: tuple
    m_A: Polynomial
    M: int
    n: int
    det_poly: Polynomial

    @property
    def sigma(self):
        return tuple(eig.lam for eig in self.eigs)

    @property
    def finite(self):
        return tuple(eig for eig in self.eigs if not eig.is_infinite)

    @property
    def infinite(self):
        return next((eig for eig in self.eigs if eig.is_infinite), None)

    @property
    def radius(self):
        """Largest finite eigenvalue modulus (0 without finite spectrum)."""
        return max((abs(eig.lam) for eig in self.finite), default=0.0)

    @property
    def sample_radius(self):
        """Radius of a sampling circle that stays clear of the finite spectrum."""
        return 2.0 * (1.0 + self.radius)

    def find(self, lam, tol=None):
        tol = setting("TOL_MATCH", tol)
        return next((eig for eig in self.eigs if same_point(eig.lam, lam, tol)), None)

    def contains(self, lam, tol=None):
        return self.find(lam, tol) is not None

    def m1(self, lam):
        eig = self.find(lam)
        return eig.m1 if eig else 0

    def root_dim(self, lam):
        eig = self.find(lam)
        return eig.root_dim if eig else 0


def _structure_at(P, lam, tol_rank):
    return nullity_tower(P, lam, P.n, tol_rank, check=False)


def _regroup(P, raw, tol_rank):
    """
    Rank-guided grouping of raw roots, used when clustering disagrees with
    the towers. From the first unclaimed root, the largest group of nearest
    raw roots whose centroid carries a matching root dimension wins.
    """
    remaining = list(raw)
    groups = []
    while remaining:
        anchor = remaining[0]
        order = sorted(range(len(remaining)), key=lambda i: abs(remaining[i] - anchor))
        best = None
        for size in range(1, len(remaining) + 1):
            picked = [remaining[i] for i in order[:size]]
            center = complex(np.mean(picked))
            tower = _structure_at(P, center, tol_rank)
            if tower[-1] == size:
                best = (center, tower, set(order[:size]))
        if best is None:
            raise StructureInconsistent(
                "No group of computed roots matches a measured root dimension.",
                anchor=anchor,
            )
        center, tower, used = best
        groups.append((center, tower))
        remaining = [z for i, z in enumerate(remaining) if i not in used]
        logger.info("regrouped roots near %s into a block of dimension %d", format_point(center), tower[-1])
    return groups


def _pair_conjugates(groups, tol):
    """Snaps near-real eigenvalues to the real axis and pairs the rest exactly."""
    snapped = []
    for lam, tower in groups:
        if abs(lam.imag) <= tol * max(1.0, abs(lam)):
            lam = complex(lam.real, 0.0)
        snapped.append((lam, tower))
    upper = [(lam, tower) for lam, tower in snapped if lam.imag > 0]
    lower = [(lam, tower) for lam, tower in snapped if lam.imag < 0]
    if len(upper) != len(lower):
        raise StructureInconsistent("Eigenvalues of a real pencil do not pair up under conjugation.")
    paired = [(lam, tower) for lam, tower in snapped if lam.imag == 0]
    for lam, tower in upper:
        j = min(range(len(lower)), key=lambda i: abs(lower[i][0] - lam.conjugate()))
        partner = lower.pop(j)
        if partner[1] != tower:
            raise StructureInconsistent(
                "Conjugate eigenvalues carry different Jordan structures.",
                eigenvalue=lam,
            )
        paired.append((lam, tower))
        paired.append((lam.conjugate(), tower))
    return paired


def eig_structure(P, tol_rank=None, cluster_tol=None):
    """
    Eigenvalues with Segre characteristics, ``m_A`` and ``M(A)``.

    The dimension at infinity comes from the dual tower, which fixes the
    degree of the determinant polynomial. Finite eigenvalues are the
    clustered roots of that polynomial, each confirmed by the tower measured
    at the cluster centroid.
    """
    tol_rank = setting("TOL_RANK", tol_rank)
    cluster_tol = setting("TOL_CLUSTER", cluster_tol)
    if not is_regular(P):
        raise NotRegular()
    n = P.n

    inf_tower = nullity_tower(P, INFINITY, n, tol_rank, check=False)
    finite_degree = n - inf_tower[-1]
    measured = char_poly(P)
    trimmed = measured.finite_degree
    det_poly = measured.det_poly
    if trimmed != finite_degree:
        logger.warning(
            "determinant degree %d disagrees with infinite root dimension %d (n=%d)",
            trimmed,
            inf_tower[-1],
            n,
        )
        det_poly = char_poly(P, degree=finite_degree).det_poly

    groups = []
    if finite_degree > 0:
        clustered = roots_with_multiplicity(det_poly, cluster_tol)
        for lam, mult in clustered:
            tower = _structure_at(P, lam, tol_rank)
            if tower[-1] != mult:
                logger.info(
                    "cluster at %s has multiplicity %d but root dimension %d; regrouping",
                    format_point(lam),
                    mult,
                    tower[-1],
                )
                groups = _regroup(P, det_poly.roots(), tol_rank)
                break
            groups.append((lam, tower))
        if P.is_real:
            groups = _pair_conjugates(groups, cluster_tol)

    eigs = [
        EigStructure(lam, segre_from_tower(tower), tower[-1], tuple(tower))
        for lam, tower in sorted(groups, key=lambda g: (g[0].real, g[0].imag))
    ]
    if inf_tower[-1]:
        eigs.append(EigStructure(INFINITY, segre_from_tower(inf_tower), inf_tower[-1], tuple(inf_tower)))

    total = sum(eig.root_dim for eig in eigs)
    if total != n:
        raise StructureInconsistent(
            "Root subspace dimensions do not add up to n.", total=total, n=n
        )
    m_A = poly_from_roots([(eig.lam, eig.m1) for eig in eigs if not eig.is_infinite])
    if P.is_real:
        m_A = m_A.real()
    sd = SpectralData(
        eigs=tuple(eigs),
        m_A=m_A,
        M=sum(eig.m1 for eig in eigs),
        n=n,
        det_poly=det_poly,
    )
    logger.debug("spectrum: %s", "; ".join(str(eig) for eig in sd.eigs))
    return sd


def minimal_quotient(P, sd, tol=1e-7):
    """
    The monic ``q`` with ``det(sE - A) = c * m_A(s) * q(s)``.

    Its roots are exactly the eigenvalues carrying two or more chains.
    """
    if sd.det_poly.is_zero:
        raise NotRegular()
    quotient, remainder = sd.det_poly.divmod(sd.m_A)
    if not remainder.is_zero and remainder.norm_inf > tol * sd.det_poly.norm_inf:
        raise StructureInconsistent(
            "m_A does not divide the determinant polynomial.",
            remainder=remainder.norm_inf,
        )
    q = quotient.monic()
    return q.real() if P.is_real else q


def jordan_chains(P, lam, tol_rank=None):
    """
    A full set of Jordan chains at ``lam``, longest first.

    Staircase: for each length ``m`` from the longest down, the kernel of
    ``B_m`` is searched for chains whose eigenvectors are farthest from the
    span of the eigenvectors already chosen.
    """
    Q, z = _local(P, lam)
    n = P.n
    tower = nullity_tower(Q, z, n, tol_rank, check=False)
    if tower[0] == 0:
        raise NotEigenvalue(eigenvalue=lam)
    counts = [*np.diff([0, *tower]).astype(int), 0]
    longest = int(np.count_nonzero(counts))

    heads = None
    chains = []
    for m in range(longest, 0, -1):
        needed = counts[m - 1] - counts[m]
        if needed <= 0:
            continue
        K = null_space_basis(chain_matrix(Q, z, m), tol_rank)
        if not np.any(K.imag):
            K = K.real
        if heads is None:
            heads = np.zeros((n, 0), dtype=K.dtype)
        Z0 = K[:n, :]
        if heads.shape[1]:
            basis, _ = np.linalg.qr(heads)
            Z0 = Z0 - basis @ (basis.conj().T @ Z0)
        _, _, vh = np.linalg.svd(Z0)
        for y in vh[:needed].conj():
            stacked = K @ y
            chain = [stacked[i * n : (i + 1) * n] for i in range(m)]
            chain = [g / np.linalg.norm(chain[0]) for g in chain]
            chains.append(chain)
            heads = np.column_stack([heads, chain[0]])
    return chains


@dataclass(frozen=True)
class Block:
    lam: complex
    length: int
    offset: int
    width: int
    infinite: bool
    leading: bool


def jordan_block(lam, size):
    return lam * np.eye(size, dtype=complex) + np.eye(size, k=1, dtype=complex)


def real_jordan_block(lam, size):
    """Real block for ``lam, conj(lam)``: ``C(a, b)`` on the diagonal, ``I_2`` above it."""
    a, b = lam.real, lam.imag
    C = np.array([[a, b], [-b, a]])
    out = np.kron(np.eye(size), C) + np.kron(np.eye(size, k=1), np.eye(2))
    return out.astype(complex)


@dataclass(frozen=True, eq=False)
class WeierstrassForm:
    S: np.ndarray
    T: np.ndarray
    J: np.ndarray
    N: np.ndarray
    r: int
    real_form: bool
    blocks: tuple
    cond: float

    @property
    def n(self):
        return self.T.shape[0]

    @property
    def E_w(self):
        return block_diag(np.eye(self.r), self.N).astype(complex)

    @property
    def A_w(self):
        return block_diag(self.J, np.eye(self.n - self.r)).astype(complex)

    def residual(self, P, s0):
        return float(np.linalg.norm(self.S @ evaluate(P, s0) @ self.T - (s0 * self.E_w - self.A_w), 2))


def weierstrass(P, real_form=False, tol_rank=None, sd=None):
    """
    Transformations with ``S(sE - A)T = s diag(I_r, N) - diag(J, I)``.

    Columns of ``T`` are Jordan chains, finite eigenvalues first;
    ``S`` inverts ``[E T_finite | A T_infinite]``. With ``real_form`` a
    conjugate pair contributes the real and imaginary parts of the chains
    of its upper half-plane member.
    """
    if real_form and not P.is_real:
        raise PreconditionViolated("The real Weierstrass form needs a real pencil.")
    sd = sd or eig_structure(P, tol_rank)
    finite_cols, inf_cols, J_blocks, N_blocks, blocks = [], [], [], [], []
    offset = 0
    for eig in sd.finite:
        lam = eig.lam
        if real_form and lam.imag < 0:
            continue
        for index, chain in enumerate(jordan_chains(P, lam, tol_rank)):
            if real_form and lam.imag > 0:
                for g in chain:
                    finite_cols.extend([g.real, g.imag])
                J_blocks.append(real_jordan_block(lam, len(chain)))
                width = 2 * len(chain)
            else:
                finite_cols.extend(g.real if real_form else g for g in chain)
                J_blocks.append(jordan_block(lam, len(chain)))
                width = len(chain)
            blocks.append(Block(lam, len(chain), offset, width, False, index == 0))
            offset += width
    if sd.infinite:
        for index, chain in enumerate(jordan_chains(P, INFINITY, tol_rank)):
            inf_cols.extend(g.real if real_form else g for g in chain)
            N_blocks.append(jordan_block(0.0, len(chain)))
            blocks.append(Block(INFINITY, len(chain), offset, len(chain), True, index == 0))
            offset += len(chain)

    n = P.n
    T_f = np.column_stack(finite_cols).astype(complex) if finite_cols else np.zeros((n, 0), complex)
    T_i = np.column_stack(inf_cols).astype(complex) if inf_cols else np.zeros((n, 0), complex)
    T = np.hstack([T_f, T_i])
    W = np.hstack([P.E @ T_f, P.A @ T_i])
    if real_form:
        T, W = T.real.astype(complex), W.real.astype(complex)
    cond = float(np.linalg.cond(W))
    if not np.isfinite(cond) or cond > setting("COND_LIMIT"):
        raise IllConditioned(cond=cond)
    S = np.linalg.inv(W)
    J = block_diag(*J_blocks).astype(complex) if J_blocks else np.zeros((0, 0), complex)
    N = block_diag(*N_blocks).astype(complex) if N_blocks else np.zeros((0, 0), complex)
    logger.debug("Weierstrass form with r=%d, cond(W)=%.3g", T_f.shape[1], cond)
    return WeierstrassForm(
        S=S, T=T, J=J, N=N, r=T_f.shape[1], real_form=real_form, blocks=tuple(blocks), cond=cond
    )
