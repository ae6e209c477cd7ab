"""Optimal common group sizes for an effectively infinite population.

For each fixed-size procedure this module finds the group size minimising
the expected number of tests per person at a given prevalence.  Dorfman
pooling admits a two-candidate closed-form bracket; the other procedures
are unimodal in the useful range, so the first local minimum of a
sequential scan is the global one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    CUTOFFS,
    Prevalence,
    Procedure,
    UnsupportedProcedureError,
    expected_tests,
    expected_tests_dorfman,
)

__all__ = [
    "OptimalSize",
    "individual_testing_optimal",
    "optimal_group_size",
    "optimal_group_size_dorfman",
    "optimal_group_size_modified_dorfman",
    "optimal_group_size_sterrett",
]


@dataclass(frozen=True)
class OptimalSize:
    """A cost-minimising group size.

    ``co_optimal`` is the second size when two sizes tie exactly; the
    reported ``k_star`` is then the smaller of the pair.
    """

    k_star: int
    cost_per_person: float
    co_optimal: int | None = None


def individual_testing_optimal(p: "Prevalence | float") -> bool:
    """True when no pooling scheme can beat one-by-one testing."""
    return Prevalence.of(p).p >= CUTOFFS.individual_best


def _argmin_exhaustive(cost, hi: int) -> tuple[int, float]:
    """Smallest k in 1..hi minimising cost(k); brute force, for verification."""
    best_k, best = 1, cost(1)
    for k in range(2, hi + 1):
        c = cost(k)
        if c < best:
            best_k, best = k, c
    return best_k, best


def _scan_first_local_min(cost, cap: int) -> OptimalSize:
    """Return the smallest k with cost(k) <= cost(k-1) and cost(k) < cost(k+1).

    Valid when the cost is unimodal over the scanned range.  An exact tie
    with the previous size means both are optimal; the smaller is reported
    and the larger recorded as co-optimal.
    """
    prev = cost(1)
    k = 2
    cur = cost(2)
    while k <= cap:
        nxt = cost(k + 1)
        if cur <= prev and cur < nxt:
            if cur == prev:
                return OptimalSize(k_star=k - 1, cost_per_person=prev, co_optimal=k)
            return OptimalSize(k_star=k, cost_per_person=cur)
        prev, cur = cur, nxt
        k += 1
    raise RuntimeError(f"group-size scan exceeded cap {cap}; cost not unimodal?")


def _scan_cap(p: float) -> int:
    return max(1000, 4 * math.ceil(p ** -0.5))


def optimal_group_size_dorfman(p: "Prevalence | float") -> OptimalSize:
    """Optimal Dorfman group size.

    Above the Dorfman limit prevalence, pooling loses to individual
    testing and the answer is 1.  Below it the minimiser is one of the two
    sizes bracketing 1 + 1/sqrt(p); both are evaluated and the cheaper
    wins (ties go to the smaller size).
    """
    prev = Prevalence.of(p)
    if prev.p >= CUTOFFS.dorfman_limit:
        return OptimalSize(k_star=1, cost_per_person=1.0)
    base = math.floor(prev.p ** -0.5)
    k_lo, k_hi = base + 1, base + 2
    cost_lo = expected_tests_dorfman(k_lo, prev).per_person
    cost_hi = expected_tests_dorfman(k_hi, prev).per_person
    if cost_lo == cost_hi:
        result = OptimalSize(k_star=k_lo, cost_per_person=cost_lo, co_optimal=k_hi)
    elif cost_lo < cost_hi:
        result = OptimalSize(k_star=k_lo, cost_per_person=cost_lo)
    else:
        result = OptimalSize(k_star=k_hi, cost_per_person=cost_hi)
    if result.cost_per_person >= 1.0:
        return OptimalSize(k_star=1, cost_per_person=1.0)
    assert result.k_star == _argmin_exhaustive(
        lambda k: expected_tests_dorfman(k, prev).per_person,
        4 + math.ceil(prev.p ** -0.5),
    )[0], "two-candidate bracket disagrees with exhaustive search"
    return result


def optimal_group_size_modified_dorfman(p: "Prevalence | float") -> OptimalSize:
    """Optimal group size for modified Dorfman pooling, by sequential scan."""
    prev = Prevalence.of(p)
    if prev.p >= CUTOFFS.individual_best:
        return OptimalSize(k_star=1, cost_per_person=1.0)

    def cost(k: int) -> float:
        return expected_tests(Procedure.MODIFIED_DORFMAN, k, prev).per_person

    return _scan_first_local_min(cost, _scan_cap(prev.p))


def optimal_group_size_sterrett(p: "Prevalence | float") -> OptimalSize:
    """Optimal group size for Sterrett retesting, by sequential scan.

    The scanned minimiser always lands within two of floor(sqrt(2/p)); the
    assertion documents that bracket without relying on it.
    """
    prev = Prevalence.of(p)
    if prev.p >= CUTOFFS.individual_best:
        return OptimalSize(k_star=1, cost_per_person=1.0)

    def cost(k: int) -> float:
        return expected_tests(Procedure.STERRETT, k, prev).per_person

    result = _scan_first_local_min(cost, _scan_cap(prev.p))
    root = math.floor(math.sqrt(2.0 / prev.p))
    assert result.k_star in (root, root + 1, root + 2), (
        f"Sterrett optimum {result.k_star} outside sqrt(2/p) bracket at p={prev.p}"
    )
    return result


_OPTIMIZERS = {
    Procedure.DORFMAN: optimal_group_size_dorfman,
    Procedure.MODIFIED_DORFMAN: optimal_group_size_modified_dorfman,
    Procedure.STERRETT: optimal_group_size_sterrett,
}


def optimal_group_size(procedure: Procedure, p: "Prevalence | float") -> OptimalSize:
    """Optimal common group size for any fixed-group-size procedure."""
    try:
        optimizer = _OPTIMIZERS[procedure]
    except KeyError:
        raise UnsupportedProcedureError(
            f"{procedure} has no common group size to optimise"
        ) from None
    return optimizer(p)
