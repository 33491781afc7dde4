# apps/placement/bounds.py
"""
Validators for how far a rank-one perturbation can move the Jordan structure.

Every check compares integer dimensions measured on ``A`` and on ``A + P``
and records them as :class:`BoundRecord` rows. Only the dimensions come
from toleranced rank decisions; the comparisons are exact.
"""

import logging
from dataclasses import dataclass

from apps.pencils.core import format_point, is_regular, same_point
from apps.pencils.exceptions import NotRegular
from apps.pencils.rank_one import perturbed
from apps.pencils.spectral import eig_structure, nullity_tower

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundRecord:
    check: str
    lam: complex | None
    k: int | None
    before: int
    after: int
    lower: int
    upper: int

    @property
    def satisfied(self):
        return self.lower <= self.after <= self.upper

    @property
    def slack(self):
        return min(self.after - self.lower, self.upper - self.after)

    def __str__(self):
        where = format_point(self.lam) if self.lam is not None else "total"
        level = f" k={self.k}" if self.k is not None else ""
        flag = "ok" if self.satisfied else "VIOLATED"
        return (
            f"{self.check:<16} {where:>12}{level:<6} "
            f"{self.before:>3} -> {self.after:<3} in [{self.lower}, {self.upper}]  {flag}"
        )


@dataclass(frozen=True)
class BoundsReport:
    title: str
    records: tuple

    @property
    def overall_pass(self):
        return all(record.satisfied for record in self.records)

    @property
    def violations(self):
        return tuple(record for record in self.records if not record.satisfied)

    def merged(self, other, title=None):
        return BoundsReport(title or self.title, self.records + other.records)


def _regular_pair(A, P1):
    B = perturbed(A, P1)
    for name, pencil in (("A", A), ("A + P", B)):
        if not is_regular(pencil):
            raise NotRegular(f"The pencil {name} is singular.")
    return B


def _union(*spectra, tol=1e-6):
    points = []
    for sigma in spectra:
        for lam in sigma:
            if not any(same_point(lam, p, tol) for p in points):
                points.append(lam)
    return points


def layer_records(A, B, sdA, sdB):
    """
    Per point and level: each layer ``dim L^{k+1}/L^k`` moves by at most one
    and each ``dim L^k`` by at most ``k``.
    """
    longest = max(eig.m1 for eig in (*sdA.eigs, *sdB.eigs))
    k_max = min(A.n, longest + 1)
    records = []
    for lam in _union(sdA.sigma, sdB.sigma):
        before = [0, *nullity_tower(A, lam, k_max + 1, check=False)]
        after = [0, *nullity_tower(B, lam, k_max + 1, check=False)]
        for k in range(1, k_max + 1):
            layer_a = before[k + 1] - before[k]
            layer_b = after[k + 1] - after[k]
            records.append(BoundRecord("layer", lam, k, layer_a, layer_b, max(0, layer_a - 1), layer_a + 1))
            records.append(
                BoundRecord("truncated", lam, k, before[k], after[k], max(0, before[k] - k), before[k] + k)
            )
    return records


def persistence_records(A, B, sdA, sdB):
    records = []
    for eig in sdA.eigs:
        if eig.geometric >= 2:
            kernel = nullity_tower(B, eig.lam, 1, check=False)[0]
            records.append(BoundRecord("persistence", eig.lam, None, eig.geometric, kernel, 1, A.n))
    for eig in sdB.eigs:
        if not sdA.contains(eig.lam):
            records.append(BoundRecord("new_geometric", eig.lam, None, 0, eig.geometric, 1, 1))
    return records


def root_dim_records(A, B, sdA, sdB, order_of, budget):
    """
    Root subspace dimensions before and after.

    ``order_of(eig)`` is how much of the old root subspace the perturbation
    may remove (``m_1`` for a free perturbation); ``budget`` caps what it
    may create.
    """
    records = []
    kept = 0
    for eig in sdA.eigs:
        after = nullity_tower(B, eig.lam, A.n, check=False)[-1]
        kept += after
        removable = order_of(eig)
        records.append(
            BoundRecord(
                "root_dim",
                eig.lam,
                None,
                eig.root_dim,
                after,
                max(0, eig.root_dim - removable),
                eig.root_dim + budget - removable,
            )
        )
    created = 0
    for eig in sdB.eigs:
        if not sdA.contains(eig.lam):
            created += eig.root_dim
            records.append(BoundRecord("new_root_dim", eig.lam, None, 0, eig.root_dim, 0, budget))
    records.append(BoundRecord("old_total", None, None, A.n, kept, A.n - budget, A.n))
    records.append(BoundRecord("new_total", None, None, 0, created, 0, budget))
    return records


def check_layer_bounds(A, P1):
    B = _regular_pair(A, P1)
    return BoundsReport("layer", tuple(layer_records(A, B, eig_structure(A), eig_structure(B))))


def check_persistence(A, P1):
    B = _regular_pair(A, P1)
    return BoundsReport("persistence", tuple(persistence_records(A, B, eig_structure(A), eig_structure(B))))


def check_root_dim_bounds(A, P1):
    B = _regular_pair(A, P1)
    sdA = eig_structure(A)
    records = root_dim_records(A, B, sdA, eig_structure(B), lambda eig: eig.m1, sdA.M)
    return BoundsReport("root_dim", tuple(records))


def check_all(A, P1, mirrored=True):
    """
    Every check at once. With ``mirrored`` the roles are swapped as well:
    ``A + P`` perturbed by ``-P`` returns to ``A`` and must obey the same
    bounds.
    """
    B = _regular_pair(A, P1)
    sdA, sdB = eig_structure(A), eig_structure(B)
    records = [
        *layer_records(A, B, sdA, sdB),
        *persistence_records(A, B, sdA, sdB),
        *root_dim_records(A, B, sdA, sdB, lambda eig: eig.m1, sdA.M),
    ]
    report = BoundsReport("bounds", tuple(records))
    if mirrored:
        back = [
            *layer_records(B, A, sdB, sdA),
            *persistence_records(B, A, sdB, sdA),
            *root_dim_records(B, A, sdB, sdA, lambda eig: eig.m1, sdB.M),
        ]
        report = report.merged(BoundsReport("mirrored", tuple(back)))
    if not report.overall_pass:
        logger.warning("bounds violated: %s", "; ".join(str(r) for r in report.violations))
    return report
