# apps/pencils/exceptions.py
"""
Domain errors raised by the pencil toolkit.

Every error derives from :class:`PencilError`. Like DRF's ``APIException`` it
has a ``default_detail`` and a ``default_code``, and it also carries a
``context`` dict with the numbers behind the failure. The management command
maps these errors to exit codes. The HTTP API maps them to status codes.
"""


class PencilError(Exception):
    default_detail = "The pencil operation failed."
    default_code = "pencil_error"

    def __init__(self, detail=None, code=None, **context):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        self.context = context
        super().__init__(self.detail)

    def as_dict(self):
        return {"detail": str(self.detail), "code": self.code, "context": _plain(self.context)}


def _plain(value):
    """Turns context values into JSON-friendly primitives."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag] if value.imag else value.real
    if hasattr(value, "item"):
        return _plain(value.item())
    return value


# poly_core


class DuplicateNodes(PencilError):
    default_detail = "Interpolation nodes must be pairwise distinct."
    default_code = "duplicate_nodes"


class ZeroPolynomial(PencilError):
    default_detail = "The zero polynomial has no well-defined root multiset."
    default_code = "zero_polynomial"


# pencil_core / spectral


class ShapeMismatch(PencilError):
    default_detail = "Matrices must be square and of equal size."
    default_code = "shape_mismatch"


class NotRegular(PencilError):
    default_detail = "The pencil is singular: det(sE - A) vanishes identically."
    default_code = "not_regular"


class StructureInconsistent(PencilError):
    default_detail = (
        "The characteristic polynomial and the rank decisions disagree on the "
        "eigenvalue structure."
    )
    default_code = "structure_inconsistent"


class NotEigenvalue(PencilError):
    default_detail = "The requested point is not an eigenvalue of the pencil."
    default_code = "not_eigenvalue"


class IllConditioned(PencilError):
    default_detail = "The transformation to Weierstrass form is too ill-conditioned."
    default_code = "ill_conditioned"


# rank_one


class InvalidRankOne(PencilError):
    default_detail = "The rank-one pencil violates its form invariants."
    default_code = "invalid_rank_one"


class NotRankOne(PencilError):
    default_detail = "The pencil sF - G does not have rank one."
    default_code = "not_rank_one"


class NotDegenerate(PencilError):
    default_detail = "The rank-one pencil is not of the degenerate form."
    default_code = "not_degenerate"


# placement / restricted / feedback


class DegreeTooHigh(PencilError):
    default_detail = "The target polynomial degree exceeds M(A) - 1."
    default_code = "degree_too_high"


class NumericallySingular(PencilError):
    default_detail = "The coefficient system is numerically rank deficient."
    default_code = "numerically_singular"


class BudgetMismatch(PencilError):
    default_detail = "The target multiplicities do not add up to the placement budget."
    default_code = "budget_mismatch"


class PreconditionViolated(PencilError):
    default_detail = "A precondition of the operation does not hold."
    default_code = "precondition_violated"


class TotalMismatch(PencilError):
    default_detail = "Both eigenvalue multisets must have total multiplicity n."
    default_code = "total_mismatch"


class HypothesisViolated(PencilError):
    default_detail = "The targets violate the restriction imposed by the fixed vectors."
    default_code = "hypothesis_violated"


class InfinityForbidden(PencilError):
    default_detail = "Infinity cannot be placed when E is invertible."
    default_code = "infinity_forbidden"


class VerificationFailed(PencilError):
    default_detail = "The constructed perturbation does not reproduce the prediction."
    default_code = "verification_failed"

    def __init__(self, detail=None, code=None, result=None, **context):
        super().__init__(detail, code, **context)
        self.result = result


class InvalidTargets(PencilError):
    default_detail = "Targets must be pairwise distinct with positive multiplicities."
    default_code = "invalid_targets"
