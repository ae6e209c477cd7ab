"""Information-theoretic lower bounds on expected test counts.

Classifying n people is equivalent to identifying one of 2**n states of
nature, so the expected number of binary tests of *any* procedure is at
least the Shannon entropy of the state distribution, and at least the
expected codeword length of an optimal binary prefix code over the
states.  The prefix-code bound is the sharper of the two but is generally
not attainable; the entropy bound is within one test below it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .core import CapacityExceededError, Prevalence

__all__ = [
    "BoundReport",
    "HUFFMAN_STATE_CAP",
    "bound_report",
    "entropy_bound",
    "huffman_lower_bound",
    "pairwise_tree_cost",
]

# Largest population for which the 2**n-state prefix code is built.
HUFFMAN_STATE_CAP = 20


@dataclass(frozen=True)
class BoundReport:
    """Entropy and (when affordable) prefix-code bounds for one design point."""

    n: int
    p: Prevalence
    entropy_bound: float
    huffman_bound: float | None


def entropy_bound(n: int, p: "Prevalence | float") -> float:
    """Shannon entropy of the n-person status vector, in expected tests."""
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    prev = Prevalence.of(p)
    return n * (prev.p * math.log2(1.0 / prev.p) + prev.q * math.log2(1.0 / prev.q))


def huffman_lower_bound(n: int, p: "Prevalence | float",
                        cap: int = HUFFMAN_STATE_CAP) -> float:
    """Expected codeword length of an optimal prefix code over all states.

    States with the same number of positives share a probability, so the
    merge queue works on (mass, multiplicity) buckets rather than on the
    2**n explicit states: while a bucket holds at least two nodes, pairs
    within it are merged wholesale; a leftover single node is merged with
    the next-lightest node on the heap.  The expected length is the sum of
    all merged masses, which does not depend on how equal-mass ties are
    broken; the heap orders ties by insertion sequence to stay
    deterministic anyway.
    """
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    if n > cap:
        raise CapacityExceededError(
            f"prefix-code bound over 2**{n} states exceeds cap of 2**{cap}")
    prev = Prevalence.of(p)

    heap: list[tuple[float, int, int]] = []
    seq = 0
    for positives in range(n + 1):
        mass = prev.p**positives * prev.q ** (n - positives)
        heapq.heappush(heap, (mass, seq, math.comb(n, positives)))
        seq += 1

    nodes = 2**n
    expected_length = 0.0
    while nodes > 1:
        mass, _, count = heapq.heappop(heap)
        if count >= 2:
            pairs = count // 2
            expected_length += 2.0 * mass * pairs
            heapq.heappush(heap, (2.0 * mass, seq, pairs))
            seq += 1
            if count % 2:
                heapq.heappush(heap, (mass, seq, 1))
                seq += 1
            nodes -= pairs
        else:
            other_mass, _, other_count = heapq.heappop(heap)
            expected_length += mass + other_mass
            heapq.heappush(heap, (mass + other_mass, seq, 1))
            seq += 1
            if other_count > 1:
                heapq.heappush(heap, (other_mass, seq, other_count - 1))
                seq += 1
            nodes -= 1
    return expected_length


def pairwise_tree_cost(p: "Prevalence | float") -> float:
    """Expected tests per person of the classical two-person tree.

    Test the pair together; on a positive, test the first person, and
    test the second only if the first was positive.  The per-person cost
    (3 - q - q**2) / 2 drops below 1 exactly below the universal cutoff.
    """
    prev = Prevalence.of(p)
    return (3.0 - prev.q - prev.q**2) / 2.0


def bound_report(n: int, p: "Prevalence | float",
                 cap: int = HUFFMAN_STATE_CAP) -> BoundReport:
    """Both bounds at once; the prefix-code bound is omitted above the cap."""
    prev = Prevalence.of(p)
    huffman = huffman_lower_bound(n, prev, cap) if n <= cap else None
    return BoundReport(n=n, p=prev, entropy_bound=entropy_bound(n, prev),
                       huffman_bound=huffman)
