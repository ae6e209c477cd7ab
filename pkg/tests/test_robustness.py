"""Minimax-design tests: regret values, estimator behaviour, table rows."""

import math

import numpy as np
import pytest

from gtdesign import (
    Procedure,
    UnsupportedProcedureError,
    expected_tests,
    minimax_group_size,
    optimal_group_size,
    regret,
    regret_curve,
    robustness_table,
)
from gtdesign.robustness import _admissible_grid, _cost_table

FIXED = (Procedure.DORFMAN, Procedure.MODIFIED_DORFMAN, Procedure.STERRETT)


def test_regret_reference_values():
    assert regret(Procedure.STERRETT,
                  optimal_group_size(Procedure.STERRETT, 0.07).k_star,
                  0.07) == 0.0
    assert regret(Procedure.STERRETT, 14, 0.001) == pytest.approx(
        0.033906, abs=1e-5)
    assert regret(Procedure.DORFMAN, 8, 0.20) == pytest.approx(0.13590, abs=1e-4)
    with pytest.raises(UnsupportedProcedureError):
        regret(Procedure.OPTIMAL_NESTED, 4, 0.1)


def test_regret_nonnegative():
    for proc in FIXED:
        for k in (1, 2, 5, 20, 80):
            for p in (0.001, 0.05, 0.2, 0.38):
                assert regret(proc, k, p) >= -1e-15


def test_vectorised_costs_match_scalar_formulas():
    sizes = np.arange(1, 50)
    ps = np.array([0.001, 0.01, 0.05, 0.2, 0.35])
    for proc in FIXED:
        table = _cost_table(proc, sizes, ps)
        for i, k in enumerate(sizes):
            for j, p in enumerate(ps):
                assert table[i, j] == pytest.approx(
                    expected_tests(proc, int(k), float(p)).per_person,
                    rel=1e-13)


def test_admissible_grid_includes_bound():
    grid = _admissible_grid(0.05, 1e-4)
    assert len(grid) == 500
    assert grid[0] == pytest.approx(1e-4)
    assert grid[-1] == 0.05
    ragged = _admissible_grid(0.05, 3e-4)
    assert ragged[-1] == 0.05


# minimax sizes: the closed estimator includes the regret limit 1/k at
# vanishing prevalence (the supremum over the open interval demands it);
# the bare grid estimator understates small-prevalence regret and shifts
# some answers, reproducing the published Sterrett sizes instead
CLOSED_SIZES = {
    (Procedure.DORFMAN, 0.05): 11,
    (Procedure.DORFMAN, 0.10): 8,
    (Procedure.DORFMAN, 0.20): 8,
    (Procedure.MODIFIED_DORFMAN, 0.05): 10,
    (Procedure.MODIFIED_DORFMAN, 0.10): 8,
    (Procedure.MODIFIED_DORFMAN, 0.20): 7,
    (Procedure.STERRETT, 0.05): 15,
    (Procedure.STERRETT, 0.10): 11,
    (Procedure.STERRETT, 0.20): 8,
}
GRID_SIZES = {
    (Procedure.DORFMAN, 0.05): 10,
    (Procedure.DORFMAN, 0.10): 8,
    (Procedure.DORFMAN, 0.20): 7,
    (Procedure.MODIFIED_DORFMAN, 0.05): 10,
    (Procedure.MODIFIED_DORFMAN, 0.10): 8,
    (Procedure.MODIFIED_DORFMAN, 0.20): 7,
    (Procedure.STERRETT, 0.05): 14,
    (Procedure.STERRETT, 0.10): 10,
    (Procedure.STERRETT, 0.20): 8,
}


@pytest.mark.parametrize("proc", FIXED)
@pytest.mark.parametrize("upper", [0.05, 0.10, 0.20])
def test_minimax_sizes_both_estimators(proc, upper):
    closed = minimax_group_size(proc, upper, 1e-4)
    assert closed.zero_limit
    assert closed.k_star_star == CLOSED_SIZES[(proc, upper)]
    bare = minimax_group_size(proc, upper, 1e-4, zero_limit=False)
    assert bare.k_star_star == GRID_SIZES[(proc, upper)]
    assert closed.worst_regret >= bare.worst_regret - 1e-15


def test_minimax_validation():
    with pytest.raises(ValueError):
        minimax_group_size(Procedure.DORFMAN, 1.2)
    with pytest.raises(ValueError):
        minimax_group_size(Procedure.DORFMAN, 0.05, grid_step=0.02)
    with pytest.raises(UnsupportedProcedureError):
        minimax_group_size(Procedure.OPTIMAL_NESTED, 0.1)


def test_minimax_survives_finer_grid():
    # a tenfold finer grid must not reveal a size beating the winner by
    # more than grid noise
    for proc in FIXED:
        coarse = minimax_group_size(proc, 0.10, 1e-3)
        fine = minimax_group_size(proc, 0.10, 1e-4)
        assert fine.worst_regret >= coarse.worst_regret - 1e-6
        k_cap = 40
        sups = []
        for k in range(1, k_cap + 1):
            samples = regret_curve(proc, k, 0.10, 1e-4).samples
            sups.append(max(max(r for _, r in samples), 1.0 / k))
        assert sups[coarse.k_star_star - 1] <= min(sups) + 1e-6


def test_minimax_never_beats_oracle_at_the_bound():
    for proc in FIXED:
        for upper in (0.05, 0.10, 0.20):
            k = minimax_group_size(proc, upper).k_star_star
            at_bound = expected_tests(proc, k, upper).per_person
            oracle = optimal_group_size(proc, upper).cost_per_person
            assert at_bound >= oracle - 1e-15


def test_regret_curve_samples():
    curve = regret_curve(Procedure.STERRETT, 7, 0.05, 1e-3)
    assert curve.k == 7
    assert all(r >= -1e-15 for _, r in curve.samples)
    at_best = dict(curve.samples)[0.05]
    assert at_best == pytest.approx(0.0, abs=1e-12)


def test_robustness_rows_at_the_bound_are_ordered():
    # at the bound itself, the sequential-retest minimax design needs no
    # more tests than the forced-last variant, which needs no more than
    # plain pooling
    for upper in (0.05, 0.10, 0.20):
        table = robustness_table(upper, [upper], n=100)
        row = table.rows[0]
        assert row.sterrett <= row.modified_dorfman + 1e-9
        assert row.modified_dorfman <= row.dorfman + 1e-9


def test_robustness_reference_row():
    # the published row at a 0.05 bound, true prevalence 0.01: plain and
    # forced-last pooling entries need the closed estimator, the
    # sequential-retest entry the bare grid one
    closed = robustness_table(0.05, [0.01], n=100)
    row = closed.rows[0]
    assert row.dorfman == pytest.approx(19.557, abs=5e-3)
    assert row.modified_dorfman == pytest.approx(19.470, abs=5e-3)
    assert row.nested_at_bound == pytest.approx(11.567, abs=5e-3)
    assert row.nested_at_half_bound == pytest.approx(9.194, abs=5e-3)
    bare = robustness_table(0.05, [0.01], n=100, zero_limit=False)
    assert bare.rows[0].sterrett == pytest.approx(15.185, abs=5e-3)


def test_robustness_table_consistency_at_true_design():
    # designing at the true prevalence recovers the optimal nested value
    table = robustness_table(0.10, [0.10], n=100)
    from gtdesign import expected_tests_nested

    assert table.rows[0].nested_at_bound == pytest.approx(
        expected_tests_nested(100, 0.10), rel=1e-10)
