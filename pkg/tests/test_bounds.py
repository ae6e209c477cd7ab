"""Bound tests: entropy values, prefix-code oracle, sandwich inequalities."""

import heapq
import math

import pytest

from gtdesign import (
    CUTOFFS,
    CapacityExceededError,
    bound_report,
    entropy_bound,
    expected_tests_nested,
    huffman_lower_bound,
    pairwise_tree_cost,
)

GOLDEN_Q = (math.sqrt(5.0) - 1.0) / 2.0


def naive_prefix_code_length(n, p):
    """Reference merge over all 2**n explicit states."""
    q = 1.0 - p
    heap = [(p ** bits.bit_count() * q ** (n - bits.bit_count()), i)
            for i, bits in enumerate(range(1 << n))]
    heapq.heapify(heap)
    seq = len(heap)
    expected = 0.0
    while len(heap) > 1:
        a, _ = heapq.heappop(heap)
        b, _ = heapq.heappop(heap)
        expected += a + b
        heapq.heappush(heap, (a + b, seq))
        seq += 1
    return expected


@pytest.mark.parametrize("n,p,want", [
    (100, 0.05, 28.640),
    (100, 0.001, 1.141),
])
def test_entropy_reference_values(n, p, want):
    assert entropy_bound(n, p) == pytest.approx(want, abs=5e-4)


def test_entropy_maximal_at_even_odds():
    assert entropy_bound(100, 0.5) == pytest.approx(100.0, rel=1e-12)


def test_entropy_symmetry():
    for p in (0.01, 0.2, 0.37):
        assert entropy_bound(64, p) == pytest.approx(
            entropy_bound(64, 1.0 - p), rel=1e-12)


def test_prefix_code_two_people():
    q = 0.7
    assert huffman_lower_bound(2, 1.0 - q) == pytest.approx(
        3.0 - q - q * q, abs=1e-12)
    assert huffman_lower_bound(1, 0.3) == pytest.approx(1.0, abs=1e-15)
    got = huffman_lower_bound(2, 0.05)
    assert got == pytest.approx(1.1475, abs=1e-12)
    assert got == pytest.approx(expected_tests_nested(2, 0.05), abs=1e-12)


def test_prefix_code_matches_explicit_state_merge():
    for n in range(1, 13):
        for p in (0.05, 0.2, 0.5, 0.8):
            bucketed = huffman_lower_bound(n, p)
            explicit = naive_prefix_code_length(n, p)
            assert bucketed == pytest.approx(explicit, rel=1e-12), (n, p)


def test_two_person_code_matches_pair_tree_up_to_cutoff():
    p = 0.01
    while p < CUTOFFS.individual_best:
        want = 3.0 - (1.0 - p) - (1.0 - p) ** 2
        assert huffman_lower_bound(2, p) == pytest.approx(want, abs=1e-12)
        p += 0.01


def test_sandwich_between_entropy_and_entropy_plus_one():
    for n in range(1, 13):
        for p in (0.01, 0.05, 0.2, 0.35, 0.5):
            lo = entropy_bound(n, p)
            code = huffman_lower_bound(n, p)
            assert lo <= code + 1e-9
            assert code <= lo + 1.0 + 1e-9


def test_pairwise_tree_cost():
    assert pairwise_tree_cost(1.0 - GOLDEN_Q) == pytest.approx(1.0, abs=1e-12)
    assert pairwise_tree_cost(0.05) == pytest.approx(0.57375, abs=1e-12)
    assert pairwise_tree_cost(1e-9) == pytest.approx(0.5, abs=1e-8)
    # cheaper than individual testing exactly below the universal cutoff
    assert pairwise_tree_cost(CUTOFFS.individual_best - 1e-9) < 1.0
    assert pairwise_tree_cost(CUTOFFS.individual_best + 1e-9) > 1.0


def test_state_space_cap():
    with pytest.raises(CapacityExceededError):
        huffman_lower_bound(21, 0.1)
    report = bound_report(40, 0.1)
    assert report.huffman_bound is None
    assert report.entropy_bound > 0.0
    small = bound_report(8, 0.1)
    assert small.huffman_bound == pytest.approx(huffman_lower_bound(8, 0.1))


def test_bounds_reject_degenerate_sizes():
    with pytest.raises(ValueError):
        entropy_bound(0, 0.1)
    with pytest.raises(ValueError):
        huffman_lower_bound(0, 0.1)
