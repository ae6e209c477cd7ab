"""Shared domain types and per-group cost formulas for pooled screening.

Three classical pooling procedures are costed here, all applied to a group
of k people who are independently positive with prevalence p:

* Dorfman: test the pool; if positive, test every member individually.
* Modified Dorfman: same, except the last member is not tested when the
  pool was positive and the first k-1 retests all came back negative (the
  last status is then forced).
* Sterrett: on a positive pool, test members one at a time until the first
  positive is found, then pool the untested remainder and repeat.

Costs are reported per person and per group; the group size that minimises
them is the subject of :mod:`gtdesign.sizing`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

__all__ = [
    "CapacityExceededError",
    "Cutoffs",
    "CUTOFFS",
    "GroupCost",
    "GroupTestingError",
    "InvalidStateError",
    "Prevalence",
    "Procedure",
    "UnsupportedProcedureError",
    "expected_tests",
    "expected_tests_dorfman",
    "expected_tests_modified_dorfman",
    "expected_tests_sterrett",
    "expected_tests_sterrett_by_recurrence",
]


class GroupTestingError(Exception):
    """Base class for errors raised by this package."""


class UnsupportedProcedureError(GroupTestingError):
    """The requested procedure does not support this operation."""


class CapacityExceededError(GroupTestingError):
    """A state-space enumeration would exceed the configured cap."""


class InvalidStateError(GroupTestingError):
    """A screening state is inconsistent with the policy it is used with."""


class Procedure(Enum):
    """The screening procedures this package can design and evaluate.

    The string values are the spellings used on the command line and in
    serialized designs.
    """

    DORFMAN = "D"
    MODIFIED_DORFMAN = "Dprime"
    STERRETT = "S"
    OPTIMAL_NESTED = "R1"

    @classmethod
    def parse(cls, token: str) -> "Procedure":
        for proc in cls:
            if token == proc.value or token.lower() == proc.value.lower():
                return proc
        raise ValueError(f"unknown procedure {token!r}; expected one of "
                         f"{[p.value for p in cls]}")


# Procedures with a common-group-size cost formula (everything but the
# optimal nested procedure, which has no fixed group size).
FIXED_SIZE_PROCEDURES = (
    Procedure.DORFMAN,
    Procedure.MODIFIED_DORFMAN,
    Procedure.STERRETT,
)


@dataclass(frozen=True)
class Prevalence:
    """A Bernoulli prevalence p strictly inside (0, 1), with q = 1 - p cached."""

    p: float
    q: float = field(init=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"prevalence must satisfy 0 < p < 1, got {self.p}")
        object.__setattr__(self, "q", 1.0 - self.p)

    @classmethod
    def of(cls, value: "Prevalence | float") -> "Prevalence":
        """Coerce a raw float to a validated Prevalence (idempotent)."""
        if isinstance(value, Prevalence):
            return value
        return cls(float(value))


@dataclass(frozen=True)
class Cutoffs:
    """Prevalence thresholds where grouping stops paying off.

    ``individual_best`` is the universal cutoff (3 - sqrt(5))/2: at or above
    it no group-testing scheme beats one-by-one testing.  ``dorfman_limit``
    is 1 - 3**(-1/3), above which plain Dorfman pooling falls back to
    singletons.  ``pairwise_lower`` is 1 - 1/sqrt(2); strictly between it
    and the universal cutoff the optimal nested procedure tests pairs.
    """

    individual_best: float = (3.0 - math.sqrt(5.0)) / 2.0
    dorfman_limit: float = 1.0 - 3.0 ** (-1.0 / 3.0)
    pairwise_lower: float = 1.0 - 1.0 / math.sqrt(2.0)


CUTOFFS = Cutoffs()

# Below this prevalence the geometric series for (1 - q**(k+1)) / (1 - q) is
# summed term by term; the direct quotient would divide two vanishing values.
_TINY_P = 1e-14


@dataclass(frozen=True)
class GroupCost:
    """Expected number of tests for one group of size k.

    ``per_person`` is the expected tests divided by k; ``total`` is the
    expected tests for the whole group (k times per_person).
    """

    k: int
    per_person: float
    total: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"group size must be >= 1, got {self.k}")
        if self.per_person < 0.0 or self.total < 0.0:
            raise ValueError("expected test counts cannot be negative")


def _require_positive_size(k: int) -> None:
    if not isinstance(k, (int,)) or isinstance(k, bool):
        raise ValueError(f"group size must be an integer, got {k!r}")
    if k < 1:
        raise ValueError(f"group size must be >= 1, got {k}")


def _geometric_sum(q: float, p: float, k: int) -> float:
    """Return (1 - q**(k+1)) / (1 - q), i.e. 1 + q + ... + q**k."""
    if p < _TINY_P:
        return math.fsum(q**i for i in range(k + 1))
    return (1.0 - q ** (k + 1)) / p


def expected_tests_dorfman(k: int, p: "Prevalence | float") -> GroupCost:
    """Expected tests under Dorfman pooling for one group of size k.

    A group of size 1 is a plain individual test.  For k >= 2 the pool
    costs one test and, with probability 1 - q**k, a positive result
    triggers k individual retests.
    """
    _require_positive_size(k)
    prev = Prevalence.of(p)
    if k == 1:
        per = 1.0
    else:
        per = 1.0 - prev.q**k + 1.0 / k
    return GroupCost(k=k, per_person=per, total=k * per)


def expected_tests_modified_dorfman(k: int, p: "Prevalence | float") -> GroupCost:
    """Expected tests for Dorfman pooling with the forced-last-member saving.

    When the pool is positive and the first k-1 retests are all negative,
    the last member must be positive and is not tested.
    """
    _require_positive_size(k)
    prev = Prevalence.of(p)
    q = prev.q
    if k == 1:
        per = 1.0  # the formula reduces to 1 exactly; skip the round-off
    else:
        per = 1.0 - q**k + 1.0 / k - (1.0 / k) * (1.0 - q) * q ** (k - 1)
    return GroupCost(k=k, per_person=per, total=k * per)


def expected_tests_sterrett(k: int, p: "Prevalence | float") -> GroupCost:
    """Expected tests under Sterrett retesting, in closed form.

    The per-person cost is (1/k) * (2k - (k-2) q - (1 + q + ... + q**k)).
    """
    _require_positive_size(k)
    prev = Prevalence.of(p)
    q = prev.q
    if k == 1:
        per = 1.0  # the formula reduces to 1 exactly; skip the round-off
    else:
        per = (2.0 * k - (k - 2.0) * q - _geometric_sum(q, prev.p, k)) / k
    return GroupCost(k=k, per_person=per, total=k * per)


def expected_tests_sterrett_by_recurrence(k: int, p: "Prevalence | float") -> GroupCost:
    """Sterrett cost computed by stepping the one-larger-group recurrence.

    Starting from a single person (one test), the expected total for a
    group of size j+1 exceeds that for size j by 2 - q - q**(j+1).  This
    routine exists as an independent cross-check of the closed form and is
    O(k); prefer :func:`expected_tests_sterrett` everywhere else.
    """
    _require_positive_size(k)
    prev = Prevalence.of(p)
    q = prev.q
    total = 1.0
    for j in range(1, k):
        total += 2.0 - q - q ** (j + 1)
    return GroupCost(k=k, per_person=total / k, total=total)


_COST_FUNCTIONS = {
    Procedure.DORFMAN: expected_tests_dorfman,
    Procedure.MODIFIED_DORFMAN: expected_tests_modified_dorfman,
    Procedure.STERRETT: expected_tests_sterrett,
}


def expected_tests(procedure: Procedure, k: int, p: "Prevalence | float") -> GroupCost:
    """Dispatch to the cost formula of a fixed-group-size procedure."""
    try:
        formula = _COST_FUNCTIONS[procedure]
    except KeyError:
        raise UnsupportedProcedureError(
            f"{procedure} has no fixed-group-size cost formula"
        ) from None
    return formula(k, p)
