"""Optimal group-testing designs and their evaluation.

The package designs pooled screening schemes for a population whose
members are independently positive with a common prevalence: classical
Dorfman pooling and its forced-last-member refinement, Sterrett
sequential retesting, and the optimal nested procedure found by dynamic
programming.  It also computes the information-theoretic lower bounds
any scheme must respect, minimax designs when only an upper bound on the
prevalence is known, and provides an independent evaluation engine
(exact enumeration, seeded simulation, and misspecified-prevalence
analysis) to check every design against.
"""

from .bounds import (
    BoundReport,
    bound_report,
    entropy_bound,
    huffman_lower_bound,
    pairwise_tree_cost,
)
from .core import (
    CUTOFFS,
    CapacityExceededError,
    Cutoffs,
    GroupCost,
    GroupTestingError,
    InvalidStateError,
    Prevalence,
    Procedure,
    UnsupportedProcedureError,
    expected_tests,
    expected_tests_dorfman,
    expected_tests_modified_dorfman,
    expected_tests_sterrett,
    expected_tests_sterrett_by_recurrence,
)
from .evaluate import (
    EvalReport,
    OutcomeVector,
    evaluate_policy_mismatch,
    exact_expected_tests,
    monte_carlo_expected_tests,
    run_procedure,
)
from .nested import (
    Action,
    BinomialState,
    DefectiveState,
    NestedPolicy,
    expected_tests_nested,
    next_action,
    policy_from_json,
    policy_to_json,
    solve_nested,
)
from .partition import (
    DirectConstruction,
    Partition,
    balance_improve,
    optimal_partition_direct,
    optimal_partition_dp,
    partition_cost,
)
from .robustness import (
    MinimaxResult,
    RegretCurve,
    RobustnessRow,
    RobustnessTable,
    minimax_group_size,
    regret,
    regret_curve,
    robustness_table,
)
from .sizing import (
    OptimalSize,
    individual_testing_optimal,
    optimal_group_size,
    optimal_group_size_dorfman,
    optimal_group_size_modified_dorfman,
    optimal_group_size_sterrett,
)

__version__ = "0.1.0"
