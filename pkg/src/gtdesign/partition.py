"""Optimal partitions of a finite population into test groups.

Two independent routes are provided and must agree: an exact dynamic
program over population prefixes, and a direct construction that spreads
the division remainder over groups whose size comes from the
infinite-population optimum.  Both return the minimal expected total
number of tests together with the group sizes that attain it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import (
    CUTOFFS,
    FIXED_SIZE_PROCEDURES,
    Prevalence,
    Procedure,
    UnsupportedProcedureError,
    expected_tests,
)
from .sizing import optimal_group_size

__all__ = [
    "DirectConstruction",
    "Partition",
    "balance_improve",
    "optimal_partition_direct",
    "optimal_partition_dp",
    "partition_cost",
]

# Absolute tolerance on expected-test totals below which two partitions are
# declared tied (ties are then broken structurally, never by float noise).
TOTAL_COST_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Partition:
    """A division of n people into groups, with its expected test total.

    ``sizes`` is stored canonically in descending order; it always sums
    to ``n``.
    """

    procedure: Procedure
    n: int
    p: Prevalence
    sizes: tuple[int, ...]
    total_expected_tests: float

    def __post_init__(self) -> None:
        if sum(self.sizes) != self.n:
            raise ValueError(f"group sizes {self.sizes} do not sum to {self.n}")

    def grouped_sizes(self) -> list[tuple[int, int]]:
        """(count, size) pairs, ascending by size; the 'c x s' presentation."""
        counts = Counter(self.sizes)
        return [(counts[s], s) for s in sorted(counts)]

    def to_dict(self) -> dict:
        return {
            "procedure": self.procedure.value,
            "N": self.n,
            "p": self.p.p,
            "sizes": sorted(self.sizes, reverse=True),
            "total_expected_tests": self.total_expected_tests,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Partition":
        return cls(
            procedure=Procedure.parse(data["procedure"]),
            n=int(data["N"]),
            p=Prevalence(float(data["p"])),
            sizes=tuple(sorted((int(s) for s in data["sizes"]), reverse=True)),
            total_expected_tests=float(data["total_expected_tests"]),
        )


@dataclass(frozen=True)
class DirectConstruction:
    """The two remainder-spreading candidates and which one won.

    ``base_size`` is the infinite-population optimal group size, ``full_groups``
    how many of them fit in n, and ``remainder`` what is left over.  Option
    one spreads the remainder over the full groups; option two opens one
    extra group.  ``chosen`` is ``"i"`` or ``"ii"``.
    """

    procedure: Procedure
    n: int
    p: Prevalence
    base_size: int
    full_groups: int
    remainder: int
    option_i: Partition
    option_ii: Partition
    chosen: str

    @property
    def partition(self) -> Partition:
        return self.option_i if self.chosen == "i" else self.option_ii


def _require_fixed_size(procedure: Procedure) -> None:
    if procedure not in FIXED_SIZE_PROCEDURES:
        raise UnsupportedProcedureError(
            f"{procedure} is not partitioned into fixed groups; "
            "use the nested-procedure solver instead"
        )


def partition_cost(procedure: Procedure, sizes, p: "Prevalence | float") -> float:
    """Expected total tests of an arbitrary multiset of group sizes."""
    prev = Prevalence.of(p)
    return float(sum(expected_tests(procedure, s, prev).total for s in sizes))


def _group_totals(procedure: Procedure, n: int, prev: Prevalence) -> np.ndarray:
    """h[j] = expected tests for one group of size j, j = 0..n (h[0] = 0)."""
    h = np.zeros(n + 1)
    for j in range(1, n + 1):
        h[j] = expected_tests(procedure, j, prev).total
    return h


def optimal_partition_dp(procedure: Procedure, n: int,
                         p: "Prevalence | float") -> Partition:
    """Exact minimal-cost partition by dynamic programming over prefixes.

    Cost-to-partition the first k people is the best over all sizes of a
    final group; split points are recovered to rebuild the group sizes.
    At or above the universal cutoff, pooling cannot help and n singleton
    groups (n tests) are returned directly.
    """
    _require_fixed_size(procedure)
    if n < 0:
        raise ValueError(f"population size must be >= 0, got {n}")
    prev = Prevalence.of(p)
    if n == 0:
        return Partition(procedure, 0, prev, (), 0.0)
    if prev.p >= CUTOFFS.individual_best:
        return Partition(procedure, n, prev, (1,) * n, float(n))

    h = _group_totals(procedure, n, prev)
    best = np.zeros(n + 1)
    split = np.zeros(n + 1, dtype=int)
    for k in range(1, n + 1):
        # candidate x = people left after carving off a final group of k - x
        cand = best[:k] + h[k:0:-1]
        x = int(np.argmin(cand))
        best[k] = cand[x]
        split[k] = x

    sizes = []
    k = n
    while k > 0:
        x = int(split[k])
        sizes.append(k - x)
        k = x
    sizes.sort(reverse=True)
    return Partition(procedure, n, prev, tuple(sizes), float(best[n]))


def _spread(n: int, groups: int) -> tuple[int, ...]:
    """Split n into ``groups`` sizes differing by at most one (descending)."""
    small = n // groups
    n_large = n - groups * small
    sizes = (small + 1,) * n_large + (small,) * (groups - n_large)
    return tuple(s for s in sizes if s > 0)


def _as_partition(procedure, n, prev, sizes) -> Partition:
    ordered = tuple(sorted(sizes, reverse=True))
    return Partition(procedure, n, prev,
                     ordered, partition_cost(procedure, ordered, prev))


def optimal_partition_direct(procedure: Procedure, n: int,
                             p: "Prevalence | float") -> DirectConstruction:
    """Optimal partition without a table: compare two remainder spreads.

    With base size a = infinite-population optimum, s = n // a and
    remainder r = n - s*a, the optimum is either (i) the remainder spread
    over s near-equal groups or (ii) spread over s + 1 near-equal groups.
    A population smaller than one base group is handled by comparing the
    single whole group against an even two-way split, which the dynamic
    program confirms on the test grid.
    """
    _require_fixed_size(procedure)
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    prev = Prevalence.of(p)
    a = optimal_group_size(procedure, prev).k_star
    s, remainder = divmod(n, a)

    if s == 0:
        sizes_i = (n,)
        sizes_ii = _spread(n, 2) if n >= 2 else (n,)
    elif remainder == 0:
        sizes_i = (a,) * s
        sizes_ii = _spread(n, s + 1) if s + 1 <= n else sizes_i
    else:
        sizes_i = _spread(n, s)
        sizes_ii = _spread(n, s + 1)

    option_i = _as_partition(procedure, n, prev, sizes_i)
    option_ii = _as_partition(procedure, n, prev, sizes_ii)
    if option_ii.total_expected_tests < option_i.total_expected_tests - TOTAL_COST_TIE_TOL:
        chosen = "ii"
    else:
        chosen = "i"
    return DirectConstruction(
        procedure=procedure,
        n=n,
        p=prev,
        base_size=a,
        full_groups=s,
        remainder=remainder,
        option_i=option_i,
        option_ii=option_ii,
        chosen=chosen,
    )


def balance_improve(procedure: Procedure, sizes,
                    p: "Prevalence | float") -> Partition:
    """Rebalance group sizes until they differ by at most one.

    Each step moves one person from a largest group to a smallest group;
    by convexity of the per-group cost in the group size this never
    increases the expected total.
    """
    _require_fixed_size(procedure)
    work = sorted(sizes, reverse=True)
    if not work:
        raise ValueError("sizes must be a nonempty collection of group sizes")
    n = sum(work)
    while work[0] - work[-1] >= 2:
        work[0] -= 1
        work[-1] += 1
        work.sort(reverse=True)
    prev = Prevalence.of(p)
    return _as_partition(procedure, n, prev, work)
