"""Minimax design when only an upper bound on the prevalence is known.

When p is unknown but bounded above by U, a fixed group size k is scored
by its regret at each admissible prevalence: the excess of its per-person
cost over the cost of the oracle-optimal size at that prevalence.  The
minimax size minimises the worst regret over a grid on (0, U].  A
companion report evaluates those minimax sizes, and nested policies
designed at U and U/2, across true prevalences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FIXED_SIZE_PROCEDURES,
    Prevalence,
    Procedure,
    UnsupportedProcedureError,
    expected_tests,
)
from .evaluate import evaluate_policy_mismatch
from .nested import solve_nested
from .sizing import optimal_group_size

__all__ = [
    "MinimaxResult",
    "RegretCurve",
    "RobustnessRow",
    "RobustnessTable",
    "minimax_group_size",
    "regret",
    "regret_curve",
    "robustness_table",
]

DEFAULT_GRID_STEP = 1e-4


@dataclass(frozen=True)
class MinimaxResult:
    """The regret-minimising group size and the worst regret it leaves.

    ``zero_limit`` records whether the supremum estimate included the
    regret's prevalence-to-zero limit alongside the grid maximum.
    """

    procedure: Procedure
    k_star_star: int
    worst_regret: float
    upper_bound: float
    grid_step: float
    zero_limit: bool


@dataclass(frozen=True)
class RegretCurve:
    """Regret of one fixed group size sampled over the admissible grid."""

    procedure: Procedure
    k: int
    samples: tuple[tuple[float, float], ...]  # (p, regret) pairs


@dataclass(frozen=True)
class RobustnessRow:
    """Per-person costs (scaled per 100 people) at one true prevalence."""

    p_true: float
    dorfman: float
    modified_dorfman: float
    sterrett: float
    nested_at_bound: float
    nested_at_half_bound: float


@dataclass(frozen=True)
class RobustnessTable:
    upper_bound: float
    n: int
    minimax_sizes: dict[str, int]
    rows: tuple[RobustnessRow, ...]


def regret(procedure: Procedure, k: int, p: "Prevalence | float") -> float:
    """Per-person cost of size k in excess of the oracle optimum at p."""
    if procedure not in FIXED_SIZE_PROCEDURES:
        raise UnsupportedProcedureError(
            f"{procedure} has no fixed group size to regret over")
    prev = Prevalence.of(p)
    best = optimal_group_size(procedure, prev).cost_per_person
    return expected_tests(procedure, k, prev).per_person - best


def _admissible_grid(upper_bound: float, grid_step: float) -> np.ndarray:
    """The grid {step, 2*step, ...} up to and always including the bound."""
    count = int(math.floor(upper_bound / grid_step + 1e-9))
    grid = grid_step * np.arange(1, count + 1)
    if count == 0 or grid[-1] < upper_bound - 1e-12:
        grid = np.append(grid, upper_bound)
    else:
        grid[-1] = upper_bound
    return grid


def _cost_table(procedure: Procedure, sizes: np.ndarray,
                ps: np.ndarray) -> np.ndarray:
    """Per-person costs for every (size, prevalence) pair, vectorised."""
    k = sizes[:, None].astype(float)
    q = (1.0 - ps)[None, :]
    qk = q**k
    if procedure is Procedure.DORFMAN:
        table = 1.0 - qk + 1.0 / k
        table[sizes == 1, :] = 1.0
    elif procedure is Procedure.MODIFIED_DORFMAN:
        table = 1.0 - qk + 1.0 / k - (1.0 / k) * (1.0 - q) * q ** (k - 1.0)
    elif procedure is Procedure.STERRETT:
        table = (2.0 * k - (k - 2.0) * q - (1.0 - q ** (k + 1.0)) / (1.0 - q)) / k
    else:
        raise UnsupportedProcedureError(f"{procedure} has no cost table")
    return table


def minimax_group_size(procedure: Procedure, upper_bound: float,
                       grid_step: float = DEFAULT_GRID_STEP,
                       k_cap: int | None = None,
                       zero_limit: bool = True) -> MinimaxResult:
    """Group size minimising the worst regret over prevalences in (0, U].

    The supremum over the open-ended interval is estimated as the larger
    of the maximum over the grid {step, 2*step, ..., U} and the regret's
    prevalence-to-zero limit.  That limit is 1/k for every procedure here
    (a fixed group of k still costs one pool test while the oracle's cost
    vanishes), it is approached from below, and prevalences arbitrarily
    close to zero are admissible, so a grid truncated at ``grid_step``
    understates the supremum by about 2*sqrt(grid_step) for every
    small-end-dominated size.  Pass ``zero_limit=False`` to use the bare
    grid maximum instead.

    Candidate sizes run up to ``k_cap`` (default
    max(200, 4*ceil(1/sqrt(U)))); the oracle optimum at each grid point is
    taken over a wider range that always contains it, so regrets are
    exact for every candidate.
    """
    if procedure not in FIXED_SIZE_PROCEDURES:
        raise UnsupportedProcedureError(
            f"{procedure} has no fixed group size to optimise")
    if not (0.0 < upper_bound < 1.0):
        raise ValueError(f"upper bound must lie in (0, 1), got {upper_bound}")
    if not (0.0 < grid_step <= upper_bound / 10.0):
        raise ValueError(
            f"grid step must lie in (0, U/10], got {grid_step} for U={upper_bound}")
    if k_cap is None:
        k_cap = max(200, 4 * math.ceil(upper_bound ** -0.5))

    grid = _admissible_grid(upper_bound, grid_step)
    # all optima live below sqrt(2/p) + 2 at the smallest grid prevalence
    k_table = max(k_cap, math.isqrt(math.ceil(2.0 / grid[0])) + 4)
    sizes = np.arange(1, k_table + 1)
    costs = _cost_table(procedure, sizes, grid)
    oracle = costs.min(axis=0)
    sup_regret = (costs[:k_cap] - oracle[None, :]).max(axis=1)
    if zero_limit:
        sup_regret = np.maximum(sup_regret, 1.0 / sizes[:k_cap])
    best_index = int(np.argmin(sup_regret))
    return MinimaxResult(
        procedure=procedure,
        k_star_star=int(sizes[best_index]),
        worst_regret=float(sup_regret[best_index]),
        upper_bound=upper_bound,
        grid_step=grid_step,
        zero_limit=zero_limit,
    )


def regret_curve(procedure: Procedure, k: int, upper_bound: float,
                 grid_step: float = DEFAULT_GRID_STEP) -> RegretCurve:
    """Sample the regret of one size over the admissible grid."""
    if procedure not in FIXED_SIZE_PROCEDURES:
        raise UnsupportedProcedureError(
            f"{procedure} has no fixed group size to regret over")
    grid = _admissible_grid(upper_bound, grid_step)
    k_table = max(k, math.isqrt(math.ceil(2.0 / grid[0])) + 4)
    sizes = np.arange(1, k_table + 1)
    costs = _cost_table(procedure, sizes, grid)
    regrets = costs[k - 1] - costs.min(axis=0)
    samples = tuple((float(p), float(r)) for p, r in zip(grid, regrets))
    return RegretCurve(procedure=procedure, k=k, samples=samples)


def robustness_table(upper_bound: float, p_list, n: int = 100,
                     grid_step: float = DEFAULT_GRID_STEP,
                     zero_limit: bool = True) -> RobustnessTable:
    """Costs per 100 people of bound-only designs across true prevalences.

    Fixed-size procedures use their minimax size for the bound; the
    nested procedure is designed once at the bound and once at half the
    bound, then each frozen policy is evaluated at every true prevalence.
    ``zero_limit`` selects the supremum estimator of
    :func:`minimax_group_size`.
    """
    minimax = {
        proc: minimax_group_size(proc, upper_bound, grid_step,
                                 zero_limit=zero_limit)
        for proc in FIXED_SIZE_PROCEDURES
    }
    policy_at_bound = solve_nested(n, upper_bound)
    policy_at_half = solve_nested(n, upper_bound / 2.0)

    rows = []
    for p in p_list:
        prev = Prevalence.of(p)
        scale = 100.0
        rows.append(RobustnessRow(
            p_true=prev.p,
            dorfman=scale * expected_tests(
                Procedure.DORFMAN,
                minimax[Procedure.DORFMAN].k_star_star, prev).per_person,
            modified_dorfman=scale * expected_tests(
                Procedure.MODIFIED_DORFMAN,
                minimax[Procedure.MODIFIED_DORFMAN].k_star_star, prev).per_person,
            sterrett=scale * expected_tests(
                Procedure.STERRETT,
                minimax[Procedure.STERRETT].k_star_star, prev).per_person,
            nested_at_bound=(scale / n) * evaluate_policy_mismatch(
                policy_at_bound, prev),
            nested_at_half_bound=(scale / n) * evaluate_policy_mismatch(
                policy_at_half, prev),
        ))
    return RobustnessTable(
        upper_bound=upper_bound,
        n=n,
        minimax_sizes={proc.value: res.k_star_star for proc, res in minimax.items()},
        rows=tuple(rows),
    )
