# apps/placement/trials.py
"""
Monte-Carlo runs over seeded random instances.

A trial either passes, ends in a :class:`VerificationFailed`, is rejected
with another :class:`PencilError`, or records a violation. A violation is
an answer that was returned as correct but fails an independent check.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from apps.pencils.core import INFINITY, is_infinite, is_regular
from apps.pencils.exceptions import HypothesisViolated, PencilError, VerificationFailed
from apps.pencils.rank_one import perturbed
from apps.pencils.spectral import eig_structure

from .bounds import check_all
from .feedback import DaeSystem, hautus_controllable, place_feedback
from .placement import PlacementSpec, inverse_construct, place
from .restricted import check_restricted_bounds, dependent_point, pole_profile, solve_w
from .sampling import integer_pencil, integer_rank_one, integer_vector, random_targets

logger = logging.getLogger(__name__)


@dataclass
class TrialSummary:
    name: str
    attempted: int = 0
    passed: int = 0
    verification_failed: int = 0
    rejected: Counter = field(default_factory=Counter)
    violations: list = field(default_factory=list)

    @property
    def pass_rate(self):
        return self.passed / self.attempted if self.attempted else 1.0

    @property
    def silent_failures(self):
        return len(self.violations)

    def record(self, outcome):
        """``outcome`` is ``True``, a violation message, or a :class:`PencilError`."""
        self.attempted += 1
        if outcome is True:
            self.passed += 1
        elif isinstance(outcome, VerificationFailed):
            self.verification_failed += 1
        elif isinstance(outcome, PencilError):
            self.rejected[outcome.code] += 1
        else:
            self.violations.append(str(outcome))

    def as_dict(self):
        return {
            "name": self.name,
            "attempted": self.attempted,
            "passed": self.passed,
            "pass_rate": self.pass_rate,
            "verification_failed": self.verification_failed,
            "rejected": dict(self.rejected),
            "violations": list(self.violations),
        }


def _sizes(rng, size_min, size_max):
    return int(rng.integers(size_min, size_max + 1))


def _run(summary, trial):
    try:
        outcome = trial()
    except PencilError as exc:
        outcome = exc
    summary.record(outcome)
    if outcome is not True:
        logger.debug("%s trial %d: %s", summary.name, summary.attempted, outcome)


def _matches(achieved, expected):
    """Integer comparison of measured root dimensions against ``(lam, dim)`` pairs."""
    if achieved is None:
        return False
    if len(achieved.eigs) != len(expected):
        return False
    return all(achieved.root_dim(lam) == dim for lam, dim in expected)


def bounds_trials(count, size_min=2, size_max=6, seed=0):
    rng = np.random.default_rng(seed)
    summary = TrialSummary("bounds")

    def trial():
        n = _sizes(rng, size_min, size_max)
        while True:
            A = integer_pencil(rng, n)
            P1 = integer_rank_one(rng, n)
            if is_regular(perturbed(A, P1)):
                break
        report = check_all(A, P1)
        if report.overall_pass:
            return True
        return "; ".join(str(record) for record in report.violations)

    for _ in range(count):
        _run(summary, trial)
    return summary


def placement_trials(count, size_min=2, size_max=5, seed=0, real_mode=False):
    rng = np.random.default_rng(seed)
    summary = TrialSummary("place-real" if real_mode else "place")

    def trial():
        A = integer_pencil(rng, _sizes(rng, size_min, size_max))
        sd = eig_structure(A)
        spec = random_targets(rng, sd.M, conjugate_symmetric=real_mode)
        result = place(A, spec, real_mode=real_mode, seed=seed, sd=sd)
        if not _matches(result.achieved, result.predicted):
            return f"achieved spectrum differs from {result.predicted}"
        P1 = result.perturbation
        if real_mode and P1 is not None:
            worst = max(float(np.max(np.abs(x.imag))) for x in (P1.u, P1.w))
            if worst > 1e-10:
                return f"real placement left imaginary parts of {worst:.3g}"
        return True

    for _ in range(count):
        _run(summary, trial)
    return summary


def _restricted_case(rng, n):
    case = rng.choice(["generic", "dependent", "input"])
    if case == "generic":
        return integer_vector(rng, n), integer_vector(rng, n)
    if case == "dependent":
        u = integer_vector(rng, n)
        return u, -int(rng.integers(-4, 5)) * u
    return np.zeros(n, dtype=complex), integer_vector(rng, n)


def restricted_trials(count, size_min=2, size_max=5, seed=0, violation_probability=0.2):
    """
    Random fixed ``(u, v)`` covering the dependent case ``v = -mu u`` and
    ``u = 0``. Some requests deliberately break the restriction and must be
    rejected.
    """
    rng = np.random.default_rng(seed)
    summary = TrialSummary("restricted")

    def trial():
        A = integer_pencil(rng, _sizes(rng, size_min, size_max))
        sd = eig_structure(A)
        u, v = _restricted_case(rng, A.n)
        profile = pole_profile(A, u, v, sd)
        mu = dependent_point(u, v)
        forbidden = None
        if mu is not None and not sd.contains(mu):
            forbidden = mu
        elif not np.any(u) and sd.infinite is None:
            forbidden = INFINITY

        if forbidden is not None and profile.M_uv and rng.random() < violation_probability:
            while True:
                rest = random_targets(rng, profile.M_uv - 1, infinity_probability=0.0)
                if not rest.multiplicity(forbidden):
                    break
            spec = PlacementSpec(((forbidden, 1), *rest.targets), profile.M_uv)
            try:
                solve_w(A, u, v, spec, seed=seed, sd=sd)
            except HypothesisViolated:
                return True
            return f"request with forbidden target {forbidden} was accepted"

        while True:
            spec = random_targets(
                rng, profile.M_uv, infinity_probability=0.0 if forbidden == INFINITY else 0.3
            )
            if forbidden is None or is_infinite(forbidden) or not spec.multiplicity(forbidden):
                break
        result = solve_w(A, u, v, spec, seed=seed, sd=sd)
        if not _matches(result.achieved, result.predicted):
            return f"achieved spectrum differs from {result.predicted}"
        report = check_restricted_bounds(A, u, v, result.w)
        if not report.overall_pass:
            return "; ".join(str(record) for record in report.violations)
        return True

    for _ in range(count):
        _run(summary, trial)
    return summary


def companion(coefficients):
    """Controllable canonical form of ``s^n + c_{n-1} s^{n-1} + ... + c_0``."""
    n = len(coefficients)
    A = np.eye(n, k=1)
    A[-1] = -np.asarray(coefficients, dtype=float)
    return A


def feedback_trials(count, size_min=2, size_max=5, seed=0):
    """
    Half of the trials use the textbook companion system ``E = I, b = e_n``;
    the others random integer systems, with singular ``E`` now and then.
    """
    rng = np.random.default_rng(seed)
    summary = TrialSummary("feedback")

    def trial():
        n = _sizes(rng, size_min, size_max)
        if rng.random() < 0.5:
            b = np.zeros(n)
            b[-1] = 1.0
            system = DaeSystem(np.eye(n), companion(rng.integers(-3, 4, size=n)), b)
        else:
            pencil = integer_pencil(rng, n)
            system = DaeSystem(pencil.E, pencil.A, integer_vector(rng, n).real)
        sd = eig_structure(system.pencil)
        verdict = hautus_controllable(system, sd=sd)
        if not verdict.agrees:
            return f"Hautus rank test says {verdict.controllable}, pole orders say {verdict.characterization}"
        profile = pole_profile(system.pencil, None, -system.b, sd)
        spec = random_targets(
            rng,
            profile.M_uv,
            infinity_probability=0.3 if sd.infinite else 0.0,
            conjugate_symmetric=True,
        )
        f, result = place_feedback(system, spec, seed=seed, sd=sd)
        if not _matches(result.achieved, result.predicted):
            return f"achieved spectrum differs from {result.predicted}"
        if verdict and sd.infinite is None and not _matches(result.achieved, spec.targets):
            return "controllable system did not reach exactly the targets"
        if not check_restricted_bounds(system.pencil, None, -system.b, f).overall_pass:
            return "closed loop violates the restricted bounds"
        return True

    for _ in range(count):
        _run(summary, trial)
    return summary


def inverse_trials(count, size_min=2, size_max=5, seed=0):
    rng = np.random.default_rng(seed)
    summary = TrialSummary("inverse")

    def trial():
        n = _sizes(rng, size_min, size_max)
        before = random_targets(rng, n)
        after = random_targets(rng, n)
        problem = inverse_construct(before, after, seed=seed)
        if not _matches(eig_structure(problem.pencil), before.targets):
            return f"constructed pencil does not have spectrum {before}"
        if not _matches(problem.result.achieved, after.targets):
            return f"perturbed pencil does not have spectrum {after}"
        return True

    for _ in range(count):
        _run(summary, trial)
    return summary


TRIALS = {
    "bounds": bounds_trials,
    "place": placement_trials,
    "restricted": restricted_trials,
    "feedback": feedback_trials,
    "inverse": inverse_trials,
}
