# apps/placement/tests.py

from unittest import mock

import numpy as np
import sympy
from django.test import SimpleTestCase
from scipy.linalg import block_diag
from scipy.signal import place_poles

from apps.pencils.core import INFINITY, Pencil
from apps.pencils.exceptions import (
    BudgetMismatch,
    DegreeTooHigh,
    HypothesisViolated,
    InfinityForbidden,
    InvalidTargets,
    NotRegular,
    PreconditionViolated,
    TotalMismatch,
)
from apps.pencils.poly import Polynomial
from apps.pencils.rank_one import RankOnePencil, materialize, perturbed
from apps.pencils.spectral import SpectralData, eig_structure, jordan_block, weierstrass

from . import restricted
from .bounds import check_all, check_layer_bounds, check_persistence, check_root_dim_bounds
from .feedback import DaeSystem, hautus_controllable, place_feedback
from .placement import (
    PlacementSpec,
    inverse_construct,
    place,
    place_single_chain,
    predicted_spectrum,
    solve_theta,
    theta,
)
from .restricted import check_restricted_bounds, place_matrix, pole_profile, solve_w, spectrum_floor
from .sampling import integer_pencil, integer_vector
from .trials import (
    bounds_trials,
    companion,
    feedback_trials,
    inverse_trials,
    placement_trials,
    restricted_trials,
)

J2 = jordan_block(0.0, 2)
I2 = np.eye(2)
E1, E2 = np.eye(2)


def spec(*targets, budget=None):
    return PlacementSpec(tuple(targets), budget)


def dims(sd):
    """``{lam: root_dim}`` rounded for comparisons."""
    return {
        (lam if lam == INFINITY else complex(round(lam.real, 6), round(lam.imag, 6))): sd.root_dim(lam)
        for lam in sd.sigma
    }


def exact_pole_orders(E, A, u, v):
    """Pole orders of ``(sE - A)^{-1}(su + v)`` at the finite poles, by symbolic resolvent."""
    s = sympy.symbols("s")
    E, A = sympy.Matrix(E), sympy.Matrix(A)
    x = (s * E - A).LUsolve(s * sympy.Matrix(u) + sympy.Matrix(v))
    orders = {}
    for entry in x:
        _, denominator = sympy.fraction(sympy.cancel(entry))
        for root, mult in sympy.roots(sympy.Poly(denominator, s)).items():
            orders[complex(root)] = max(orders.get(complex(root), 0), mult)
    return orders


class PlacementSpecTest(SimpleTestCase):
    def test_budget_mismatch(self):
        with self.assertRaises(BudgetMismatch) as ctx:
            spec((1.0, 1), budget=2)
        self.assertEqual(ctx.exception.context, {"expected": 2, "got": 1})

    def test_duplicate_targets(self):
        with self.assertRaises(InvalidTargets):
            spec((1.0, 1), (1.0, 2))

    def test_conjugate_symmetry(self):
        self.assertTrue(spec((1j, 1), (-1j, 1), (INFINITY, 1)).is_conjugate_symmetric())
        self.assertFalse(spec((1j, 1), (-1j, 2)).is_conjugate_symmetric())

    def test_infinite_multiplicity(self):
        targets = spec((INFINITY, 2), (0.0, 1))
        self.assertEqual(targets.infinite_multiplicity, 2)
        self.assertEqual(targets.finite, ((0j, 1),))
        self.assertEqual(str(targets), "inf:2, 0:1")


class SolveThetaTest(SimpleTestCase):
    """``v* m_A(s) (sE - A)^{-1} u = p`` in Weierstrass coordinates."""

    def solve(self, P, p):
        sd = eig_structure(P)
        wf = weierstrass(P, sd=sd)
        solution = solve_theta(sd, wf, p)
        self.assertTrue(theta(P, sd, solution.u, solution.v).allclose(p, rtol=1e-8))
        return solution

    def test_scalar(self):
        u, v, _ = self.solve(Pencil([[1.0]], [[0.0]]), Polynomial([2.5]))
        self.assertAlmostEqual(complex(np.conj(v[0]) * u[0]), 2.5)

    def test_jordan_block_against_symbolic_resolvent(self):
        u, v, _ = self.solve(Pencil(I2, J2), Polynomial([1.0]))
        s = sympy.symbols("s")
        scaled = sympy.simplify(s**2 * (s * sympy.eye(2) - sympy.Matrix(J2.real.astype(int))).inv())
        coefficients = [
            np.array([[float(sympy.Poly(e, s).coeff_monomial(s**k)) for e in row] for row in scaled.tolist()])
            for k in range(2)
        ]
        self.assertAlmostEqual(complex(np.vdot(v, coefficients[0] @ u)), 1.0)
        self.assertAlmostEqual(abs(complex(np.vdot(v, coefficients[1] @ u))), 0.0)

    def test_polynomial_resolvent_at_infinity(self):
        P = Pencil(J2, I2)
        u, v, _ = self.solve(P, Polynomial([0.0, 1.0]))
        # (sN - I)^{-1} = -(I + sN)
        self.assertAlmostEqual(complex(-np.vdot(v, u)), 0.0)
        self.assertAlmostEqual(complex(-np.vdot(v, J2 @ u)), 1.0)

    def test_degree_too_high(self):
        P = Pencil(I2, J2)
        sd = eig_structure(P)
        with self.assertRaises(DegreeTooHigh):
            solve_theta(sd, weierstrass(P, sd=sd), Polynomial([0, 0, 1]))


class PlaceTest(SimpleTestCase):
    """Unrestricted placement by ``(s - beta) u v*``."""

    def test_jordan_block_to_two_simple_eigenvalues(self):
        A = Pencil(I2, J2)
        result = place(A, spec((1.0, 1), (-1.0, 1)), seed=0)
        self.assertTrue(result.verified)
        self.assertEqual(dims(result.achieved), {1: 1, -1: 1})
        self.assertLess(result.det_residual, 1e-7)
        B = perturbed(A, result.perturbation)
        np.testing.assert_allclose(sorted(np.linalg.eigvals(np.linalg.solve(B.E, B.A)).real), [-1, 1], atol=1e-7)

    def test_second_chain_survives(self):
        A = Pencil(np.eye(3), block_diag(J2, [[0.0]]))
        result = place(A, spec((5.0, 2)), seed=0)
        self.assertEqual(dims(result.achieved), {0: 1, 5: 2})

    def test_real_placement(self):
        A = Pencil(I2, np.diag([1.0, 2.0]))
        result = place(A, spec((1j, 1), (-1j, 1)), real_mode=True, seed=0)
        P1 = result.perturbation
        self.assertLessEqual(np.max(np.abs(P1.u.imag)), 1e-10)
        self.assertLessEqual(np.max(np.abs(P1.w.imag)), 1e-10)
        self.assertEqual(dims(result.achieved), {1j: 1, -1j: 1})

    def test_real_mode_needs_symmetric_targets(self):
        with self.assertRaises(PreconditionViolated):
            place(Pencil(I2, np.diag([1.0, 2.0])), spec((1j, 1), (2.0, 1)), real_mode=True)

    def test_budget_is_minimal_polynomial_degree(self):
        with self.assertRaises(BudgetMismatch):
            place(Pencil(I2, J2), spec((1.0, 1)))

    def test_placing_infinity(self):
        result = place(Pencil(I2, J2), spec((INFINITY, 1), (3.0, 1)), seed=0)
        self.assertEqual(dims(result.achieved), {INFINITY: 1, 3: 1})

    def test_singular_pencil(self):
        with self.assertRaises(NotRegular):
            place(Pencil(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])), spec((1.0, 1)))


class SingleChainTest(SimpleTestCase):
    def test_triple_eigenvalue(self):
        result = place_single_chain(Pencil(np.eye(3), jordan_block(0.0, 3)), spec((2.0, 3)), seed=0)
        eig = result.achieved.find(2.0)
        self.assertEqual(eig.segre, (3,))

    def test_diagonal_relocation(self):
        result = place_single_chain(Pencil(I2, np.diag([1.0, 2.0])), spec((7.0, 1), (8.0, 1)), seed=0)
        self.assertEqual(dims(result.achieved), {7: 1, 8: 1})

    def test_infinity_and_zero(self):
        result = place_single_chain(Pencil(J2, I2), spec((INFINITY, 1), (0.0, 1)), seed=0)
        self.assertEqual(result.achieved.find(INFINITY).segre, (1,))
        self.assertEqual(result.achieved.find(0.0).segre, (1,))

    def test_two_chains_rejected(self):
        with self.assertRaises(PreconditionViolated):
            place_single_chain(Pencil(I2, np.zeros((2, 2))), spec((1.0, 1)))


class InverseConstructTest(SimpleTestCase):
    def test_nilpotent_to_infinity(self):
        problem = inverse_construct(((0.0, 2),), ((INFINITY, 2),), seed=0)
        np.testing.assert_allclose(problem.pencil.A, J2)
        self.assertEqual(problem.result.achieved.find(INFINITY).segre, (2,))

    def test_diagonal_shift(self):
        problem = inverse_construct(((1.0, 1), (2.0, 1)), ((3.0, 1), (4.0, 1)), seed=0)
        self.assertEqual(dims(eig_structure(problem.pencil)), {1: 1, 2: 1})
        self.assertEqual(dims(problem.result.achieved), {3: 1, 4: 1})

    def test_fixed_point(self):
        problem = inverse_construct(((1.0, 2),), ((1.0, 2),), seed=0)
        self.assertEqual(dims(problem.result.achieved), {1: 2})
        self.assertIsNone(problem.perturbation)
        self.assertTrue(problem.result.verified)

    def test_total_mismatch(self):
        with self.assertRaises(TotalMismatch):
            inverse_construct(((1.0, 1),), ((1.0, 2),))


class BoundsTest(SimpleTestCase):
    """Dimension bounds for rank-one perturbations."""

    def test_layer_bounds_on_jordan_block(self):
        report = check_layer_bounds(Pencil(I2, J2), RankOnePencil.left(None, E2, E1))
        self.assertTrue(report.overall_pass)

    def test_tiny_perturbation_keeps_dimensions(self):
        A = Pencil(I2, np.diag([1.0, 2.0]))
        report = check_layer_bounds(A, RankOnePencil.left(None, 1e-3 * E1, E2))
        for record in report.records:
            if record.check == "truncated":
                self.assertEqual(record.before, record.after)

    def test_destroying_a_simple_eigenvalue_is_tight(self):
        # P = e1 e1* moves the eigenvalue 1 to 0
        A = Pencil(I2, np.diag([1.0, 2.0]))
        report = check_layer_bounds(A, RankOnePencil.left(None, E1, E1))
        tight = [r for r in report.records if r.check == "truncated" and r.k == 1 and r.after == r.lower]
        self.assertTrue(tight)
        self.assertTrue(report.overall_pass)

    def test_persistence_of_two_blocks(self):
        A = Pencil(I2, np.zeros((2, 2)))
        report = check_persistence(A, RankOnePencil.left(E1, E2, [1.0, 1.0]))
        self.assertTrue(report.overall_pass)
        self.assertIn("persistence", {r.check for r in report.records})

    def test_new_eigenvalues_are_geometrically_simple(self):
        A = Pencil(I2, np.diag([1.0, 2.0]))
        result = place(A, spec((5.0, 1), (6.0, 1)), seed=0)
        report = check_persistence(A, result.perturbation)
        self.assertTrue(report.overall_pass)
        self.assertEqual(len([r for r in report.records if r.check == "new_geometric"]), 2)

    def test_scalar_case(self):
        report = check_persistence(Pencil([[1.0]], [[0.0]]), RankOnePencil.degenerate(1, 1, [1.0], [1.0]))
        self.assertTrue(report.overall_pass)

    def test_root_dims_after_placement(self):
        A = Pencil(I2, J2)
        result = place(A, spec((1.0, 1), (-1.0, 1)), seed=0)
        report = check_root_dim_bounds(A, result.perturbation)
        self.assertTrue(report.overall_pass)
        (zero,) = [r for r in report.records if r.check == "root_dim"]
        self.assertEqual((zero.before, zero.after, zero.lower), (2, 0, 0))

    def test_check_all_mirrored(self):
        A = Pencil(np.eye(3), np.diag([1.0, 2.0, 3.0]))
        P1 = RankOnePencil.left([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], np.ones(3))
        report = check_all(A, P1)
        self.assertTrue(report.overall_pass)
        self.assertGreater(len(report.records), len(check_all(A, P1, mirrored=False).records))

    def test_singular_perturbed_pencil(self):
        A = Pencil(I2, np.zeros((2, 2)))
        with self.assertRaises(NotRegular):
            check_layer_bounds(A, RankOnePencil.degenerate(-1, 0, E1, E1))


class PoleProfileTest(SimpleTestCase):
    def test_full_order(self):
        profile = pole_profile(Pencil(I2, J2), None, E2)
        self.assertEqual(profile.order(0.0), 2)
        self.assertEqual(profile.M_uv, 2)

    def test_partial_order(self):
        profile = pole_profile(Pencil(I2, J2), None, E1)
        self.assertEqual(profile.order(0.0), 1)
        self.assertEqual(profile.M_uv, 1)

    def test_zero_vectors(self):
        profile = pole_profile(Pencil(I2, J2), None, None)
        self.assertEqual(profile.M_uv, 0)

    def test_infinite_order(self):
        profile = pole_profile(Pencil(J2, I2), None, -E2)
        self.assertEqual(profile.order(INFINITY), 1)

    def test_infinite_order_when_dual_zero_is_off_target(self):
        with mock.patch.object(SpectralData, "find", return_value=None):
            profile = pole_profile(Pencil(J2, I2), None, -E2)
        self.assertEqual(profile.order(INFINITY), 1)

    def test_matches_symbolic_resolvent(self):
        rng = np.random.default_rng(13)
        for _ in range(6):
            n = int(rng.integers(2, 4))
            E = np.eye(n)
            A = rng.integers(-2, 3, size=(n, n)).astype(float)
            A = np.triu(A)  # integer eigenvalues on the diagonal
            u, v = integer_vector(rng, n), integer_vector(rng, n)
            expected = exact_pole_orders(E.astype(int), A.astype(int), u.real.astype(int), v.real.astype(int))
            profile = pole_profile(Pencil(E, A), u, v)
            for lam, order in expected.items():
                with self.subTest(lam=lam):
                    self.assertEqual(profile.order(lam), order)


class RestrictedPlacementTest(SimpleTestCase):
    """``w`` for fixed ``u, v``."""

    def test_floor(self):
        A = Pencil(I2, J2)
        self.assertEqual(spectrum_floor(A, None, E2), ())
        (lam,) = spectrum_floor(A, None, E1)
        self.assertAlmostEqual(lam, 0.0, places=6)
        self.assertEqual(len(spectrum_floor(Pencil(I2, np.zeros((2, 2))), E1, E2)), 1)

    def test_full_budget(self):
        result = solve_w(Pencil(I2, J2), None, E2, spec((1.0, 1), (-1.0, 1)), seed=0)
        self.assertEqual(dims(result.achieved), {1: 1, -1: 1})

    def test_partial_budget_keeps_floor(self):
        result = solve_w(Pencil(I2, J2), None, E1, spec((5.0, 1)), seed=0)
        self.assertEqual(dims(result.achieved), {0: 1, 5: 1})
        np.testing.assert_allclose(result.w, [-5.0, 0.0], atol=1e-8)

    def test_dependent_vectors_forbid_mu(self):
        with self.assertRaises(HypothesisViolated):
            solve_w(Pencil(I2, J2), E1, -3 * E1, spec((3.0, 1)))

    def test_dependent_vectors_pin_gamma(self):
        A = Pencil(I2, J2)
        profile = pole_profile(A, E2, -3 * E2)
        result = solve_w(A, E2, -3 * E2, spec((4.0, profile.M_uv)), seed=0)
        self.assertTrue(result.verified)

    def test_dependent_vectors_at_an_eigenvalue(self):
        A = Pencil(I2, np.diag([0.0, 1.0]))
        u = np.array([1.0, 1.0])
        profile = pole_profile(A, u, -u)
        self.assertEqual(profile.M_uv, 1)
        self.assertEqual(profile.order(0.0), 1)
        self.assertEqual(profile.order(1.0), 0)

        target = spec((1.0, 1))
        result = solve_w(A, u, -u, target, seed=0)
        expected = predicted_spectrum(eig_structure(A), target, lambda eig: profile.order(eig.lam))
        self.assertEqual(dims(result.achieved), {1: 2})
        self.assertEqual(len(result.predicted), len(expected))
        for (lam, dim), (lam_expected, dim_expected) in zip(result.predicted, expected):
            self.assertAlmostEqual(lam, lam_expected, places=6)
            self.assertEqual(dim, dim_expected)
        np.testing.assert_allclose(result.w, [1.0, -1.0], atol=1e-8)
        self.assertTrue(check_restricted_bounds(A, u, -u, result.w).overall_pass)

    def test_unreachable_normalized_target_fits_gamma(self):
        least_squares = restricted._least_squares
        calls = []

        def normalized_misses(C, b):
            calls.append(C.shape)
            x, residual = least_squares(C, b)
            return (x, 1.0) if len(calls) == 1 else (x, residual)

        with mock.patch.object(restricted, "_least_squares", side_effect=normalized_misses):
            with self.assertLogs("apps.placement.restricted", "INFO"):
                result = solve_w(Pencil(I2, J2), None, E2, spec((1.0, 1), (-1.0, 1)), seed=0)
        self.assertEqual(calls, [(3, 2), (3, 3)])
        self.assertAlmostEqual(result.gamma, 1.0, places=8)
        self.assertTrue(result.verified)
        self.assertEqual(dims(result.achieved), {1: 1, -1: 1})

    def test_input_vector_cannot_create_infinity(self):
        with self.assertRaises(HypothesisViolated):
            solve_w(Pencil(I2, J2), None, E2, spec((INFINITY, 1), (1.0, 1)))

    def test_both_vectors_vanish(self):
        with self.assertRaises(PreconditionViolated):
            solve_w(Pencil(I2, J2), None, None, spec())

    def test_bounds_hold_for_solution(self):
        A = Pencil(I2, J2)
        result = solve_w(A, None, E2, spec((2.0, 1), (3.0, 1)), seed=0)
        self.assertTrue(check_restricted_bounds(A, None, E2, result.w).overall_pass)

    def test_zero_w_has_full_slack(self):
        report = check_restricted_bounds(Pencil(I2, J2), None, E1, np.zeros(2))
        (record,) = [r for r in report.records if r.check == "root_dim"]
        self.assertEqual(record.after, record.before)
        self.assertTrue(report.overall_pass)


class PlaceMatrixTest(SimpleTestCase):
    def test_given_input_vector(self):
        result = place_matrix(J2, E2, spec((1.0, 1), (-1.0, 1)), seed=0)
        closed = J2 + np.outer(E2, result.w.conj())
        np.testing.assert_allclose(sorted(np.linalg.eigvals(closed).real), [-1, 1], atol=1e-7)
        np.testing.assert_allclose(result.v, E2)

    def test_auto_vector_relocates_everything(self):
        A0 = np.diag([1.0, 2.0, 3.0])
        result = place_matrix(A0, None, spec((-1.0, 1), (-2.0, 1), (-3.0, 1)), seed=0)
        closed = A0 + np.outer(result.v, result.w.conj())
        np.testing.assert_allclose(sorted(np.linalg.eigvals(closed).real), [-3, -2, -1], atol=1e-7)

    def test_two_blocks_keep_zero(self):
        result = place_matrix(np.zeros((2, 2)), E1, spec((4.0, 1)), seed=0)
        self.assertEqual(dims(result.achieved), {0: 1, 4: 1})


class FeedbackTest(SimpleTestCase):
    """Single-input descriptor systems."""

    def test_hautus(self):
        self.assertTrue(hautus_controllable(DaeSystem(I2, J2, E2)))
        verdict = hautus_controllable(DaeSystem(I2, J2, E1))
        self.assertFalse(verdict)
        self.assertAlmostEqual(verdict.witness, 0.0, places=6)
        self.assertTrue(verdict.agrees)
        self.assertFalse(hautus_controllable(DaeSystem(I2, I2, [1.0, 2.0])))

    def test_hautus_routes_agree(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            A = integer_pencil(rng, 3)
            verdict = hautus_controllable(DaeSystem(A.E, A.A, integer_vector(rng, 3)))
            self.assertTrue(verdict.agrees)

    def test_companion_placement(self):
        f, result = place_feedback(DaeSystem(I2, J2, E2), spec((-1.0, 1), (-2.0, 1)), seed=0)
        np.testing.assert_allclose(f, [-2.0, -3.0], atol=1e-8)
        self.assertEqual(dims(result.achieved), {-1: 1, -2: 1})

    def test_matches_textbook_pole_placement(self):
        A = companion([1.0, -2.0, 0.5])
        b = np.array([0.0, 0.0, 1.0])
        poles = [-1.0, -2.0, -3.0]
        f, _ = place_feedback(DaeSystem(np.eye(3), A, b), spec(*[(p, 1) for p in poles]), seed=0)
        K = place_poles(A, b[:, None], poles).gain_matrix
        np.testing.assert_allclose(f.real, -K[0], atol=1e-7)

    def test_singular_leading_matrix(self):
        system = DaeSystem(J2, I2, E2)
        f, result = place_feedback(system, spec((-1.0, 1)), seed=0)
        np.testing.assert_allclose(f, [1.0, 0.0], atol=1e-8)
        self.assertEqual(result.achieved.root_dim(INFINITY), 1)

    def test_uncontrollable_keeps_zero(self):
        _, result = place_feedback(DaeSystem(I2, J2, E1), spec((-1.0, 1)), seed=0)
        self.assertEqual(dims(result.achieved), {0: 1, -1: 1})

    def test_infinity_forbidden(self):
        with self.assertRaises(InfinityForbidden):
            place_feedback(DaeSystem(I2, J2, E2), spec((INFINITY, 1), (-1.0, 1)))

    def test_closed_loop_matches(self):
        system = DaeSystem(I2, J2, E2)
        f, result = place_feedback(system, spec((-1.0, 1), (-2.0, 1)), seed=0)
        closed = system.closed_loop(f)
        np.testing.assert_allclose(closed.A, system.A + materialize(result.perturbation).A, atol=1e-12)


class TrialsTest(SimpleTestCase):
    """Short seeded Monte-Carlo runs; the full counts run through ``manage.py pencil trials``."""

    def test_bounds(self):
        summary = bounds_trials(15, size_max=4, seed=1)
        self.assertEqual(summary.violations, [])
        self.assertEqual(summary.passed + sum(summary.rejected.values()), summary.attempted)

    def test_placement(self):
        summary = placement_trials(15, size_max=4, seed=2)
        self.assertEqual(summary.violations, [])
        self.assertGreaterEqual(summary.pass_rate, 0.9)

    def test_real_placement(self):
        summary = placement_trials(10, size_max=4, seed=3, real_mode=True)
        self.assertEqual(summary.violations, [])
        self.assertGreaterEqual(summary.pass_rate, 0.9)

    def test_restricted(self):
        summary = restricted_trials(15, size_max=4, seed=4)
        self.assertEqual(summary.violations, [])
        self.assertGreaterEqual(summary.pass_rate, 0.8)

    def test_feedback(self):
        summary = feedback_trials(15, size_max=4, seed=5)
        self.assertEqual(summary.violations, [])
        self.assertGreaterEqual(summary.pass_rate, 0.9)

    def test_inverse(self):
        summary = inverse_trials(10, size_max=4, seed=6)
        self.assertEqual(summary.violations, [])
        self.assertGreaterEqual(summary.pass_rate, 0.9)
