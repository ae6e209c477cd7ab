"""Optimal nested screening policies by dynamic programming.

A nested procedure keeps the unclassified people split into at most two
sets: a *binomial set* (no information beyond the prevalence) and a
*defective set* (known to contain at least one positive).  Screening
alternates between two situations:

* H-situation: only a binomial set of size n remains.  The policy tests
  some x of them together; a negative clears all x, a positive turns
  those x into the defective set.
* G-situation: a defective set of size m (plus a binomial remainder).
  The policy tests a proper subset of size x of the defective set.  A
  negative clears the subset; a positive makes the subset the new
  defective set and releases the other m - x people back into the
  binomial set, where they carry no extra information.

The solver fills two value tables in O(N^2): ``h1[n]``, the minimal
expected tests to resolve a binomial set of size n, and ``f1star[m]``, a
normalised cost of breaking a defective set of size m down to its first
confirmed positive.  The argmins form an executable policy (``x_h``,
``x_g``).  The subset scan in the breakdown recursion can be capped at
m // 2 without changing any value; ``use_halving=False`` disables the cap
so that equivalence can be checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import InvalidStateError, Prevalence

__all__ = [
    "Action",
    "BinomialState",
    "DefectiveState",
    "NestedPolicy",
    "expected_tests_nested",
    "next_action",
    "policy_from_json",
    "policy_to_json",
    "solve_nested",
]

# Two candidate split sizes closer in value than this are treated as tied,
# and the smaller size wins; keeps argmins platform-independent.
ARGMIN_TIE_TOL = 1e-12


@dataclass(frozen=True)
class NestedPolicy:
    """Value and decision tables of an optimal nested screening policy.

    All arrays have length n + 1 and are indexed by set size; slot 0 is
    padding.  ``x_h[1]`` is 1 (a single binomial person is simply tested)
    and ``x_g[1]`` is 0 (a singleton defective set is declared positive
    without a test).
    """

    design_p: Prevalence
    n: int
    h1: tuple[float, ...]
    f1star: tuple[float, ...]
    x_h: tuple[int, ...]
    x_g: tuple[int, ...]

    @property
    def expected_tests(self) -> float:
        """Expected tests to resolve the full population of size n."""
        return self.h1[self.n]


@dataclass(frozen=True)
class BinomialState:
    """H-situation: n unclassified people, all binomial."""

    n: int


@dataclass(frozen=True)
class DefectiveState:
    """G-situation: defective set of size m among n unclassified people."""

    m: int
    n: int


@dataclass(frozen=True)
class Action:
    """What the policy does next in a given state.

    ``kind`` is ``"test_binomial"`` (test ``size`` people from the binomial
    set), ``"test_defective"`` (test ``size`` people from the defective
    set), or ``"classify_positive"`` (declare the lone defective-set member
    positive; no test is spent).
    """

    kind: str
    size: int


def _argmin_smallest(values: np.ndarray) -> int:
    """Index of the smallest value, preferring earlier indices on near-ties."""
    vmin = float(values.min())
    return int(np.argmax(values <= vmin + ARGMIN_TIE_TOL))


def solve_nested(n: int, p: "Prevalence | float", *,
                 use_halving: bool = True) -> NestedPolicy:
    """Solve for the optimal nested policy on a population of size n.

    Fills the breakdown table first (it does not depend on the binomial
    table), then the binomial table, recording the minimising split size
    at every step.  Memory is O(n); work is O(n^2).
    """
    if n < 0:
        raise ValueError(f"population size must be >= 0, got {n}")
    prev = Prevalence.of(p)
    q = prev.q

    h1 = np.zeros(n + 1)
    f1star = np.zeros(n + 1)
    x_h = np.zeros(n + 1, dtype=int)
    x_g = np.zeros(n + 1, dtype=int)
    if n == 0:
        return NestedPolicy(prev, 0, (0.0,), (0.0,), (0,), (0,))

    qpow = q ** np.arange(n + 1)
    h1[1] = 1.0
    x_h[1] = 1

    for m in range(2, n + 1):
        limit = m // 2 if use_halving else m - 1
        # candidates over x = 1..limit: q**x * f1star[m-x] + f1star[x]
        cand = qpow[1:limit + 1] * f1star[m - 1:m - limit - 1:-1] + f1star[1:limit + 1]
        x = _argmin_smallest(cand) + 1
        f1star[m] = (1.0 - qpow[m]) / (1.0 - q) + cand[x - 1]
        x_g[m] = x

    for size in range(2, n + 1):
        h_rev = h1[size - 1::-1]  # h1[size-1], ..., h1[0]
        weighted = np.cumsum(qpow[:size] * h_rev)
        cand = qpow[1:size + 1] * h_rev + (1.0 - q) * (f1star[1:size + 1] + weighted)
        x = _argmin_smallest(cand) + 1
        h1[size] = 1.0 + cand[x - 1]
        x_h[size] = x

    return NestedPolicy(
        design_p=prev,
        n=n,
        h1=tuple(float(v) for v in h1),
        f1star=tuple(float(v) for v in f1star),
        x_h=tuple(int(v) for v in x_h),
        x_g=tuple(int(v) for v in x_g),
    )


def expected_tests_nested(n: int, p: "Prevalence | float") -> float:
    """Minimal expected tests to classify n people with a nested procedure."""
    return solve_nested(n, p).expected_tests


def next_action(policy: NestedPolicy,
                state: "BinomialState | DefectiveState") -> Action:
    """The policy's next move in a binomial or defective situation."""
    if isinstance(state, BinomialState):
        if not (1 <= state.n <= policy.n):
            raise InvalidStateError(
                f"binomial set of size {state.n} outside 1..{policy.n}")
        if state.n == 1:
            return Action(kind="test_binomial", size=1)
        return Action(kind="test_binomial", size=policy.x_h[state.n])
    if isinstance(state, DefectiveState):
        if not (1 <= state.m <= state.n <= policy.n):
            raise InvalidStateError(
                f"defective set {state.m} of {state.n} outside policy range "
                f"1..{policy.n}")
        if state.m == 1:
            return Action(kind="classify_positive", size=1)
        return Action(kind="test_defective", size=policy.x_g[state.m])
    raise InvalidStateError(f"unrecognised state {state!r}")


def policy_to_json(policy: NestedPolicy) -> str:
    """Serialize a policy; arrays stay 1-indexed via the slot-0 padding."""
    return json.dumps(
        {
            "design_p": policy.design_p.p,
            "N": policy.n,
            "H1": list(policy.h1),
            "F1star": list(policy.f1star),
            "x_H": list(policy.x_h),
            "x_G": list(policy.x_g),
        }
    )


def policy_from_json(text: str) -> NestedPolicy:
    """Parse and validate a serialized policy."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"policy is not valid JSON: {exc}") from exc
    required = {"design_p", "N", "H1", "F1star", "x_H", "x_G"}
    missing = required - set(data)
    if missing:
        raise ValueError(f"policy JSON is missing fields: {sorted(missing)}")
    n = int(data["N"])
    arrays = {}
    for key, caster in (("H1", float), ("F1star", float), ("x_H", int), ("x_G", int)):
        values = data[key]
        if len(values) != n + 1:
            raise ValueError(
                f"policy field {key} must have length N+1 = {n + 1}, "
                f"got {len(values)}")
        arrays[key] = tuple(caster(v) for v in values)
    return NestedPolicy(
        design_p=Prevalence(float(data["design_p"])),
        n=n,
        h1=arrays["H1"],
        f1star=arrays["F1star"],
        x_h=arrays["x_H"],
        x_g=arrays["x_G"],
    )
