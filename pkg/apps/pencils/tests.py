# apps/pencils/tests.py

import itertools
from unittest import mock

import numpy as np
import sympy
from django.test import SimpleTestCase, override_settings
from scipy.linalg import block_diag

from apps.placement.sampling import integer_pencil

from .conf import overrides, setting, tolerances
from .core import INFINITY, Pencil, char_poly, dualize, evaluate, format_point, is_regular
from .exceptions import (
    DuplicateNodes,
    InvalidRankOne,
    NotDegenerate,
    NotEigenvalue,
    NotRankOne,
    PreconditionViolated,
    ShapeMismatch,
    ZeroPolynomial,
)
from .poly import Polynomial, default_nodes, interpolate, poly_from_roots, roots_with_multiplicity
from .rank_one import (
    RankOneForm,
    RankOnePencil,
    RegularityKind,
    decompose,
    degenerate_regularity_check,
    materialize,
)
from .spectral import (
    eig_structure,
    jordan_block,
    jordan_chains,
    minimal_quotient,
    nullity_tower,
    segre_from_tower,
    weierstrass,
)

J2 = jordan_block(0.0, 2)
I2 = np.eye(2)
E1, E2 = np.eye(2)


def unimodular(rng, n):
    """Integer matrix with determinant one (product of unit triangular factors)."""
    L = np.tril(rng.integers(-2, 3, size=(n, n)), -1) + np.eye(n)
    U = np.triu(rng.integers(-2, 3, size=(n, n)), 1) + np.eye(n)
    return L @ U


def exact_tower(E, A, lam, k_max):
    """Nullity tower in rational arithmetic; ``lam`` is an integer or ``INFINITY``."""
    E = sympy.Matrix(np.rint(np.real(E)).astype(int).tolist())
    A = sympy.Matrix(np.rint(np.real(A)).astype(int).tolist())
    if lam == INFINITY:
        E, A, lam = -A, -E, 0
    lam = sympy.Integer(int(round(complex(lam).real)))
    n = E.shape[0]
    tower = []
    for k in range(1, k_max + 1):
        B = sympy.zeros(k * n, k * n)
        for i in range(k):
            B[i * n : (i + 1) * n, i * n : (i + 1) * n] = A - lam * E
            if i:
                B[i * n : (i + 1) * n, (i - 1) * n : i * n] = -E
        tower.append(k * n - B.rank())
    return tower


S = sympy.Symbol("s")


def invariant_factors(M):
    """Invariant factors of a polynomial matrix in ``s`` over the rationals (determinantal divisors)."""
    n = M.shape[0]
    divisors = [sympy.Poly(1, S, domain="QQ")]
    for k in range(1, n + 1):
        g = sympy.Poly(0, S, domain="QQ")
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                g = g.gcd(sympy.Poly(M.extract(list(rows), list(cols)).det(), S, domain="QQ"))
        divisors.append(g.monic())
    return [divisors[k].exquo(divisors[k - 1]) for k in range(1, n + 1)]


def exact_segre(E, A):
    """
    Segre characteristics of an integer pencil in exact arithmetic.

    Returns ``(finite, infinite)``: ``finite`` pairs every irreducible factor
    of the determinant with the characteristic shared by all of its roots;
    ``infinite`` is the characteristic at 0 of the reversed pencil ``E - sA``.
    """
    E = sympy.Matrix(np.rint(np.real(E)).astype(int).tolist())
    A = sympy.Matrix(np.rint(np.real(A)).astype(int).tolist())

    exponents = {}
    for factor in invariant_factors(S * E - A):
        for p, e in factor.factor_list()[1]:
            exponents.setdefault(p.monic(), []).append(e)
    finite = [(p, tuple(sorted(es, reverse=True))) for p, es in exponents.items()]

    at_zero = []
    for factor in invariant_factors(E - S * A):
        e = 0
        while not factor.is_zero and factor.eval(0) == 0:
            factor, e = factor.exquo(sympy.Poly(S, S, domain="QQ")), e + 1
        if e:
            at_zero.append(e)
    return finite, tuple(sorted(at_zero, reverse=True))


def tower_from_segre(segre, n):
    return tuple(sum(min(k, m) for m in segre) for k in range(1, n + 1))


def nearest_factor(factors, lam):
    """The factor whose (relative) value at ``lam`` is smallest."""

    def relative(p):
        coeffs = [float(c) for c in p.all_coeffs()]
        scale = sum(abs(c) * abs(lam) ** i for i, c in enumerate(reversed(coeffs)))
        return abs(np.polyval(coeffs, lam)) / scale

    return min(factors, key=lambda item: relative(item[0]))


class PolynomialTest(SimpleTestCase):
    """Interpolation, arithmetic and clustered root finding."""

    def test_interpolate_constant(self):
        p = interpolate([0, 1], [1, 1])
        self.assertEqual(p.degree, 0)
        self.assertAlmostEqual(p(7.0), 1.0)

    def test_interpolate_even_monomial(self):
        p = interpolate([0, 1, -1], [0, 1, 1])
        self.assertTrue(p.allclose(Polynomial([0, 0, 1]), rtol=1e-12))

    def test_interpolate_duplicate_nodes(self):
        with self.assertRaises(DuplicateNodes):
            interpolate([1.0, 1.0], [0.0, 2.0])

    def test_interpolate_reproduces_polynomial(self):
        rng = np.random.default_rng(3)
        p = Polynomial(rng.standard_normal(6) + 1j * rng.standard_normal(6))
        nodes = default_nodes(6, 2.0)
        q = interpolate(nodes, [p(s) for s in nodes])
        self.assertTrue(q.allclose(p, rtol=1e-10))

    def test_char_poly_by_interpolation_matches_cofactor_expansion(self):
        rng = np.random.default_rng(11)
        E = rng.integers(-3, 4, size=(3, 3))
        A = rng.integers(-3, 4, size=(3, 3))
        s = sympy.symbols("s")
        exact = sympy.Poly((s * sympy.Matrix(E) - sympy.Matrix(A)).det(), s).all_coeffs()[::-1]
        nodes = default_nodes(4)
        values = [np.linalg.det(z * E - A) for z in nodes]
        self.assertTrue(interpolate(nodes, values).allclose(Polynomial([float(c) for c in exact]), 1e-10))

    def test_roots_simple(self):
        roots = roots_with_multiplicity(Polynomial([-1, 0, 1]))
        self.assertEqual([m for _, m in roots], [1, 1])
        self.assertAlmostEqual(roots.values[0], -1.0)
        self.assertAlmostEqual(roots.values[1], 1.0)

    def test_roots_triple(self):
        roots = roots_with_multiplicity(poly_from_roots([(2.0, 3)]))
        self.assertEqual(len(roots), 1)
        value, mult = roots.roots[0]
        self.assertEqual(mult, 3)
        self.assertAlmostEqual(value, 2.0, places=6)

    def test_roots_mixed_multiplicities(self):
        p = poly_from_roots([(0.0, 2), (1.0, 1), (3.0, 2)])
        roots = roots_with_multiplicity(p)
        self.assertEqual([m for _, m in roots], [2, 1, 2])
        self.assertEqual(roots.total, 5)
        np.testing.assert_allclose(roots.values, [0, 1, 3], atol=1e-6)

    def test_roots_of_zero_polynomial(self):
        with self.assertRaises(ZeroPolynomial):
            roots_with_multiplicity(Polynomial.zero())

    def test_poly_from_roots(self):
        self.assertTrue(poly_from_roots([(0.0, 2)]).allclose(Polynomial([0, 0, 1])))
        self.assertTrue(poly_from_roots([(1.0, 1), (-1.0, 1)], leading=3).allclose(Polynomial([-3, 0, 3])))
        self.assertTrue(poly_from_roots([(INFINITY, 2), (1.0, 1)]).allclose(Polynomial([-1, 1])))

    def test_power(self):
        self.assertTrue((Polynomial([-2.0, 1.0]) ** 3).allclose(poly_from_roots([(2.0, 3)])))
        self.assertTrue((Polynomial([1j, 1.0]) ** 0).allclose(Polynomial([1.0])))

    def test_vanishing_order(self):
        p = poly_from_roots([(2.0, 3), (1.0, 1)])
        self.assertEqual(p.vanishing_order(2.0, 1e-10), 3)
        self.assertEqual(p.vanishing_order(2.0, 1e-10, cap=2), 2)
        self.assertEqual(p.vanishing_order(5.0, 1e-10), 0)

    def test_divide_linear_remainder_is_value(self):
        p = Polynomial([1, -2, 0, 4])
        quotient, remainder = p.divide_linear(3.0)
        self.assertAlmostEqual(remainder, p(3.0))
        self.assertTrue((quotient * Polynomial([-3.0, 1.0]) + remainder).allclose(p))


class PencilCoreTest(SimpleTestCase):
    """Evaluation, determinant polynomial, regularity and duality."""

    def setUp(self):
        # Left vector form with u = e1, v = (1, 1), w = (1, 1)
        self.F = np.array([[1.0, 1.0], [0.0, 0.0]])
        self.G = -np.ones((2, 2))

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            Pencil(np.eye(2), np.eye(3))
        with self.assertRaises(ShapeMismatch):
            Pencil(np.ones((2, 3)), np.ones((2, 3)))

    def test_evaluate(self):
        np.testing.assert_allclose(evaluate(Pencil(I2, np.zeros((2, 2))), 3.0), 3 * I2)
        np.testing.assert_allclose(evaluate(Pencil(self.F, self.G), 0.0), np.ones((2, 2)))

    def test_evaluate_random_integer_pencil(self):
        rng = np.random.default_rng(5)
        E, A = rng.integers(-3, 4, size=(2, 4, 4))
        np.testing.assert_allclose(evaluate(Pencil(E, A), 2.0), 2 * E - A)

    def test_char_poly_diagonal(self):
        cp = char_poly(Pencil(I2, np.diag([1.0, 2.0])))
        self.assertEqual(cp.finite_degree, 2)
        self.assertTrue(cp.det_poly.allclose(Polynomial([2, -3, 1]), rtol=1e-10))

    def test_char_poly_nilpotent_leading(self):
        cp = char_poly(Pencil(J2, I2))
        self.assertEqual(cp.finite_degree, 0)
        self.assertTrue(cp.det_poly.allclose(Polynomial([1.0]), rtol=1e-10))

    def test_char_poly_of_rank_one_pencil_vanishes(self):
        cp = char_poly(Pencil(self.F, self.G))
        self.assertTrue(cp.det_poly.is_zero)

    def test_is_regular(self):
        self.assertTrue(is_regular(Pencil(I2, np.zeros((2, 2)))))
        self.assertFalse(is_regular(Pencil([[0.0]], [[0.0]])))
        self.assertFalse(is_regular(Pencil(self.F, self.G)))

    def test_dualize(self):
        dual = dualize(Pencil(I2, np.zeros((2, 2))))
        np.testing.assert_allclose(dual.E, np.zeros((2, 2)))
        np.testing.assert_allclose(dual.A, -I2)

    def test_dual_moves_eigenvalue_to_reciprocal(self):
        dual = dualize(Pencil([[1.0]], [[2.0]]))
        roots = roots_with_multiplicity(char_poly(dual).det_poly)
        self.assertAlmostEqual(roots.values[0], 0.5)

    def test_char_poly_degree_drops_with_singular_leading_matrix(self):
        P = Pencil(np.diag([1.0, 0.0, 1.0]), np.diag([2.0, 1.0, 3.0]))
        self.assertEqual(char_poly(P).finite_degree, 2)

    def test_format_point(self):
        self.assertEqual(format_point(INFINITY), "inf")
        self.assertEqual(format_point(2.0), "2")
        self.assertEqual(format_point(1 - 2j), "1-2i")


class SpectralTest(SimpleTestCase):
    """Nullity towers, Segre characteristics, chains and the Weierstrass form."""

    def test_tower_at_jordan_block(self):
        self.assertEqual(nullity_tower(Pencil(I2, J2), 0.0, 2), [1, 2])

    def test_tower_outside_spectrum(self):
        self.assertEqual(nullity_tower(Pencil(I2, np.diag([1.0, 2.0])), 5.0, 2), [0, 0])

    def test_tower_at_infinity(self):
        self.assertEqual(nullity_tower(Pencil(J2, I2), INFINITY, 2), [1, 2])

    def test_segre_from_tower(self):
        self.assertEqual(segre_from_tower([2, 3, 3]), (2, 1))
        self.assertEqual(segre_from_tower([1, 2, 3]), (3,))

    def test_eig_structure_jordan_block(self):
        sd = eig_structure(Pencil(I2, J2))
        self.assertEqual(len(sd.eigs), 1)
        eig = sd.eigs[0]
        self.assertAlmostEqual(eig.lam, 0.0, places=7)
        self.assertEqual(eig.segre, (2,))
        self.assertEqual(sd.M, 2)
        self.assertTrue(sd.m_A.allclose(Polynomial([0, 0, 1]), rtol=1e-7))

    def test_eig_structure_infinity_only(self):
        sd = eig_structure(Pencil(J2, I2))
        self.assertEqual(sd.sigma, (INFINITY,))
        self.assertEqual(sd.infinite.segre, (2,))
        self.assertEqual(sd.m_A.degree, 0)
        self.assertEqual(sd.M, 2)

    def test_eig_structure_mixed_blocks(self):
        A = block_diag(J2, [[0.0]], [[3.0]])
        sd = eig_structure(Pencil(np.eye(4), A))
        self.assertEqual(sd.find(0.0).segre, (2, 1))
        self.assertEqual(sd.find(3.0).segre, (1,))
        self.assertEqual(sd.M, 3)
        self.assertTrue(sd.m_A.allclose(poly_from_roots([(0.0, 2), (3.0, 1)]), rtol=1e-6))

    def test_eig_structure_matches_rational_oracle(self):
        """Hidden Jordan structure behind integer unimodular transformations."""
        rng = np.random.default_rng(2024)
        cases = [
            (block_diag(J2, [[0.0]]), np.eye(3), [0.0]),
            (block_diag(jordan_block(1.0, 2), [[-2.0]]), np.eye(3), [1.0, -2.0]),
            (block_diag([[2.0]], np.eye(2)), block_diag([[1.0]], J2), [2.0, INFINITY]),
            (block_diag(jordan_block(-1.0, 3), [[-1.0]]), np.eye(4), [-1.0]),
        ]
        for A_w, E_w, points in cases:
            n = A_w.shape[0]
            X, Y = unimodular(rng, n), unimodular(rng, n)
            E, A = X @ E_w @ Y, X @ A_w @ Y
            sd = eig_structure(Pencil(E, A))
            for lam in points:
                with self.subTest(lam=lam, n=n):
                    eig = sd.find(lam)
                    self.assertIsNotNone(eig)
                    self.assertEqual(list(eig.nullity_tower), exact_tower(E, A, lam, n))

    def test_random_integer_pencils_match_invariant_factors(self):
        rng = np.random.default_rng(5)
        for n in (2, 3, 4):
            for _ in range(4):
                P = integer_pencil(rng, n)
                finite, infinite = exact_segre(P.E, P.A)
                sd = eig_structure(P)
                with self.subTest(E=P.E.tolist(), A=P.A.tolist()):
                    self.assertEqual(len(sd.finite), sum(p.degree() for p, _ in finite))
                    for eig in sd.finite:
                        _, segre = nearest_factor(finite, eig.lam)
                        self.assertEqual(eig.segre, segre)
                        self.assertEqual(eig.nullity_tower, tower_from_segre(segre, n))
                        self.assertEqual(segre_from_tower(nullity_tower(P, eig.lam, n)), segre)
                    if infinite:
                        self.assertEqual(sd.infinite.segre, infinite)
                        self.assertEqual(sd.infinite.nullity_tower, tower_from_segre(infinite, n))
                        self.assertEqual(eig_structure(dualize(P)).find(0.0).segre, infinite)
                    else:
                        self.assertIsNone(sd.infinite)

    def test_eig_structure_samples_determinant_once(self):
        with mock.patch("apps.pencils.spectral.char_poly", wraps=char_poly) as sampled:
            sd = eig_structure(Pencil(block_diag(I2, [[0.0]]), block_diag(J2, [[1.0]])))
        self.assertEqual(sampled.call_count, 1)
        self.assertEqual(sd.find(0.0).segre, (2,))

    def test_dual_swaps_zero_and_infinity(self):
        E = block_diag(I2, [[1.0]], J2)
        A = block_diag(J2, [[0.0]], I2)
        P = Pencil(E, A)
        sd, sd_dual = eig_structure(P), eig_structure(dualize(P))
        self.assertEqual(sd.find(0.0).segre, (2, 1))
        self.assertEqual(sd.infinite.segre, (2,))
        self.assertEqual(sd_dual.find(0.0).segre, sd.infinite.segre)
        self.assertEqual(sd_dual.infinite.segre, sd.find(0.0).segre)

    def test_conjugate_pair_of_real_pencil(self):
        sd = eig_structure(Pencil(I2, [[0.0, 1.0], [-1.0, 0.0]]))
        lams = sorted(sd.sigma, key=lambda z: z.imag)
        self.assertEqual(lams[0], lams[1].conjugate())
        self.assertTrue(sd.m_A.is_real)

    def test_minimal_quotient(self):
        A = block_diag(J2, [[0.0]], [[3.0]])
        P = Pencil(np.eye(4), A)
        q = minimal_quotient(P, eig_structure(P))
        self.assertTrue(q.allclose(Polynomial([0, 1]), rtol=1e-6))

    def test_jordan_chain_of_block(self):
        P = Pencil(I2, J2)
        (chain,) = jordan_chains(P, 0.0)
        self.assertEqual(len(chain), 2)
        np.testing.assert_allclose(P.A @ chain[0], 0, atol=1e-10)
        np.testing.assert_allclose(P.A @ chain[1], P.E @ chain[0], atol=1e-10)

    def test_jordan_chain_at_infinity(self):
        P = Pencil(J2, I2)
        (chain,) = jordan_chains(P, INFINITY)
        np.testing.assert_allclose(P.E @ chain[0], 0, atol=1e-10)
        np.testing.assert_allclose(P.E @ chain[1], P.A @ chain[0], atol=1e-10)

    def test_two_independent_chains(self):
        P = Pencil(np.eye(4), block_diag(J2, J2))
        chains = jordan_chains(P, 0.0)
        self.assertEqual([len(c) for c in chains], [2, 2])
        stacked = np.column_stack([g for chain in chains for g in chain])
        self.assertEqual(np.linalg.matrix_rank(stacked), 4)

    def test_jordan_chains_outside_spectrum(self):
        with self.assertRaises(NotEigenvalue):
            jordan_chains(Pencil(I2, J2), 1.0)

    def test_weierstrass_jordan_block(self):
        P = Pencil(I2, J2)
        wf = weierstrass(P)
        self.assertEqual(wf.r, 2)
        np.testing.assert_allclose(wf.J, J2, atol=1e-12)
        for s0 in (0.5, 2.0 + 1j, -3.0):
            self.assertLess(wf.residual(P, s0), 1e-8)

    def test_weierstrass_infinite_part(self):
        P = Pencil(J2, I2)
        wf = weierstrass(P)
        self.assertEqual(wf.r, 0)
        np.testing.assert_allclose(wf.N, J2, atol=1e-12)
        for s0 in (0.3, -1.0, 4.0j):
            self.assertLess(wf.residual(P, s0), 1e-8)

    def test_weierstrass_real_form(self):
        P = Pencil(I2, [[0.0, 1.0], [-1.0, 0.0]])
        wf = weierstrass(P, real_form=True)
        np.testing.assert_allclose(wf.J, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-10)
        self.assertLess(np.max(np.abs(wf.S.imag)), 1e-12)
        self.assertLess(np.max(np.abs(wf.T.imag)), 1e-12)
        self.assertLess(wf.residual(P, 1.5), 1e-8)

    def test_weierstrass_columns_are_jordan_chains(self):
        rng = np.random.default_rng(3)
        E_w = block_diag(np.eye(4), J2)
        A_w = block_diag(jordan_block(1.0, 2), [[1.0]], [[-2.0]], I2)
        X, Y = unimodular(rng, 6), unimodular(rng, 6)
        P = Pencil(X @ E_w @ Y, X @ A_w @ Y)
        wf = weierstrass(P)

        for lam in (1.0, -2.0, INFINITY):
            if lam == INFINITY:
                blocks = [b for b in wf.blocks if b.infinite]
            else:
                blocks = [b for b in wf.blocks if not b.infinite and abs(b.lam - lam) < 1e-6]
            with self.subTest(lam=lam):
                self.assertEqual([b.length for b in blocks], [len(c) for c in jordan_chains(P, lam)])
                for block in blocks:
                    cols = wf.T[:, block.offset : block.offset + block.width].T
                    if block.infinite:
                        np.testing.assert_allclose(P.E @ cols[0], 0, atol=1e-6)
                        for prev, g in zip(cols, cols[1:]):
                            np.testing.assert_allclose(P.E @ g, P.A @ prev, atol=1e-6)
                    else:
                        np.testing.assert_allclose((P.A - lam * P.E) @ cols[0], 0, atol=1e-6)
                        for prev, g in zip(cols, cols[1:]):
                            np.testing.assert_allclose((P.A - lam * P.E) @ g, P.E @ prev, atol=1e-6)

        np.testing.assert_allclose(wf.S @ P.E @ wf.T, wf.E_w, atol=1e-6)
        np.testing.assert_allclose(wf.S @ P.A @ wf.T, wf.A_w, atol=1e-6)
        self.assertEqual([b.length for b in wf.blocks], [1, 2, 1, 2])

    def test_real_form_of_complex_pencil(self):
        with self.assertRaises(PreconditionViolated):
            weierstrass(Pencil(I2, [[1j, 0], [0, 1.0]]), real_form=True)

    def test_weierstrass_residual_on_random_pencils(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            E, A = rng.integers(-3, 4, size=(2, 4, 4)).astype(float)
            P = Pencil(E, A)
            if not is_regular(P):
                continue
            wf = weierstrass(P)
            for s0 in rng.standard_normal(5) + 1j * rng.standard_normal(5):
                self.assertLess(wf.residual(P, s0), 1e-8 * (1 + wf.cond))


class RankOneTest(SimpleTestCase):
    """Structured rank-one pencils and their decomposition."""

    def assertSamePencil(self, first, second):
        np.testing.assert_allclose(first.E, second.E, atol=1e-12)
        np.testing.assert_allclose(first.A, second.A, atol=1e-12)

    def test_materialize_left_vector(self):
        P1 = RankOnePencil.left(E1, [1.0, 1.0], [1.0, 1.0])
        pencil = materialize(P1)
        np.testing.assert_allclose(P1(2.0), [[3, 3], [1, 1]])
        np.testing.assert_allclose(pencil.E, [[1, 1], [0, 0]])

    def test_materialize_constant_pencil(self):
        pencil = materialize(RankOnePencil.left(None, E1, E1))
        np.testing.assert_allclose(pencil.E, 0)
        np.testing.assert_allclose(pencil.A, -np.outer(E1, E1))

    def test_materialize_degenerate(self):
        pencil = materialize(RankOnePencil.degenerate(1, 0, E1, E2))
        np.testing.assert_allclose(pencil.E, np.outer(E1, E2))
        np.testing.assert_allclose(pencil.A, 0)

    def test_invalid_rank_one(self):
        with self.assertRaises(InvalidRankOne):
            RankOnePencil.left(E1, E2, np.zeros(2))
        with self.assertRaises(InvalidRankOne):
            RankOnePencil.right(np.zeros(2), np.zeros(2), E1)
        with self.assertRaises(InvalidRankOne):
            RankOnePencil.degenerate(0, 0, E1, E1)

    def test_decompose_left_vector(self):
        F = np.array([[1.0, 1.0], [0.0, 0.0]])
        G = -np.ones((2, 2))
        P1 = decompose(F, G)
        self.assertEqual(P1.form, RankOneForm.LEFT_VECTOR)
        self.assertSamePencil(materialize(P1), Pencil(F, G))
        # w is normalized, so u is e1 scaled by |w| = sqrt(2)
        np.testing.assert_allclose(P1.w, np.ones(2) / np.sqrt(2))
        np.testing.assert_allclose(P1.u, [np.sqrt(2), 0], atol=1e-12)
        np.testing.assert_allclose(P1.v, [np.sqrt(2), np.sqrt(2)], atol=1e-12)

    def test_decompose_right_vector(self):
        F = np.array([[1.0, 0.0], [1.0, 0.0]])
        G = -np.ones((2, 2))
        P1 = decompose(F, G)
        self.assertEqual(P1.form, RankOneForm.RIGHT_VECTOR)
        self.assertSamePencil(materialize(P1), Pencil(F, G))

    def test_decompose_degenerate(self):
        F = G = np.outer(E1, E1)
        P1 = decompose(F, G)
        self.assertEqual(P1.form, RankOneForm.DEGENERATE)
        self.assertAlmostEqual(P1.ratio, 1.0)
        self.assertSamePencil(materialize(P1), Pencil(F, G))

    def test_decompose_round_trip_random(self):
        rng = np.random.default_rng(17)
        for form in RankOneForm:
            for _ in range(5):
                u, v, w = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
                if form == RankOneForm.DEGENERATE:
                    P1 = RankOnePencil.degenerate(1.5, -0.5 + 1j, u, w)
                else:
                    P1 = RankOnePencil(form, u, v, w)
                pencil = materialize(P1)
                back = decompose(pencil.E, pencil.A)
                with self.subTest(form=form):
                    self.assertEqual(back.form, form)
                    self.assertSamePencil(materialize(back), pencil)

    def test_decompose_rank_two(self):
        with self.assertRaises(NotRankOne):
            decompose(np.eye(2), np.zeros((2, 2)))

    def test_negated(self):
        P1 = RankOnePencil.right(E1, E2, [1.0, 2.0])
        total = materialize(P1) + materialize(P1.negated())
        np.testing.assert_allclose(total.E, 0)
        np.testing.assert_allclose(total.A, 0)

    def test_degenerate_regularity_check(self):
        A = Pencil(I2, np.diag([1.0, 2.0]))
        verdict = degenerate_regularity_check(A, RankOnePencil.degenerate(1, 5, E1, E2))
        self.assertEqual(verdict.kind, RegularityKind.REGULAR_GUARANTEED)
        verdict = degenerate_regularity_check(A, RankOnePencil.degenerate(1, 1, E1, E2))
        self.assertEqual(verdict.kind, RegularityKind.SHARED_EIGENVALUE)
        self.assertAlmostEqual(verdict.eigenvalue, 1.0)

    def test_degenerate_regularity_check_at_infinity(self):
        verdict = degenerate_regularity_check(Pencil(J2, I2), RankOnePencil.degenerate(0, 1, E1, E2))
        self.assertEqual(verdict.kind, RegularityKind.SHARED_EIGENVALUE)
        self.assertEqual(verdict.eigenvalue, INFINITY)

    def test_regularity_check_needs_degenerate_form(self):
        with self.assertRaises(NotDegenerate):
            degenerate_regularity_check(Pencil(I2, J2), RankOnePencil.left(E1, E2, E1))


class ConfigurationTest(SimpleTestCase):
    def test_defaults(self):
        self.assertEqual(setting("TOL_RANK"), 1e-9)
        self.assertEqual(setting("TOL_RANK", 1e-6), 1e-6)

    @override_settings(PENCIL_LAB={"TOL_CLUSTER": 1e-5})
    def test_settings_override(self):
        self.assertEqual(setting("TOL_CLUSTER"), 1e-5)
        self.assertEqual(setting("TOL_MATCH"), 1e-6)
        self.assertEqual(tolerances(tol_rank=1e-8)["tol_rank"], 1e-8)
        self.assertEqual(tolerances()["tol_cluster"], 1e-5)

    def test_scoped_overrides(self):
        with overrides(tol_rank=1e-6, seed=None):
            self.assertEqual(setting("TOL_RANK"), 1e-6)
            self.assertEqual(tolerances()["tol_rank"], 1e-6)
        self.assertEqual(setting("TOL_RANK"), 1e-9)
        with self.assertRaises(KeyError):
            with overrides(tol_unknown=1.0):
                pass
