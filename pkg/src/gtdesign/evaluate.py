"""Independent evaluation of screening designs.

Everything here judges a design without trusting the formulas that
produced it: deterministic executors replay a procedure on a concrete
infection vector and count tests; an exact oracle enumerates all 2**n
infection vectors with their probabilities; a seeded Monte Carlo engine
samples them; and a recursion evaluates a frozen nested policy under a
prevalence different from the one it was designed for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CapacityExceededError,
    FIXED_SIZE_PROCEDURES,
    Prevalence,
    Procedure,
    UnsupportedProcedureError,
)
from .nested import NestedPolicy
from .partition import Partition

__all__ = [
    "ENUMERATION_CAP",
    "EvalReport",
    "OutcomeVector",
    "evaluate_policy_mismatch",
    "exact_expected_tests",
    "monte_carlo_expected_tests",
    "run_procedure",
]

ENUMERATION_CAP = 20

# Monte Carlo rows are padded to a multiple of 4 doubles so each replicate
# starts on a Philox counter-block boundary (one block = 4 doubles).
_MC_CHUNK_ROWS = 65536


@dataclass(frozen=True)
class OutcomeVector:
    """Infection statuses of n people, packed little-endian into an int."""

    bits: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"length must be >= 0, got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits 0x{self.bits:x} do not fit in {self.n} slots")

    @classmethod
    def from_statuses(cls, statuses) -> "OutcomeVector":
        statuses = list(statuses)
        bits = 0
        for i, s in enumerate(statuses):
            if s not in (0, 1, True, False):
                raise ValueError(f"status at position {i} must be 0/1, got {s!r}")
            if s:
                bits |= 1 << i
        return cls(bits=bits, n=len(statuses))

    def statuses(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(self.n))


@dataclass(frozen=True)
class EvalReport:
    """An expected-test estimate and how it was obtained."""

    expected_tests: float
    method: str  # "exact" | "monte_carlo" | "analytic"
    description: str
    replicates: int | None = None
    seed: int | None = None
    std_error: float | None = None


def _block_positive(bits: int, lo: int, hi: int) -> bool:
    return bits >> lo & ((1 << (hi - lo)) - 1) != 0


def _tests_dorfman_block(bits: int, lo: int, hi: int) -> int:
    k = hi - lo
    if k == 1:
        return 1
    if not _block_positive(bits, lo, hi):
        return 1
    return 1 + k


def _tests_modified_dorfman_block(bits: int, lo: int, hi: int) -> int:
    k = hi - lo
    if k == 1:
        return 1
    if not _block_positive(bits, lo, hi):
        return 1
    if _block_positive(bits, lo, hi - 1):
        return 1 + k
    # first k-1 retests negative: the last status is forced, not tested
    return 1 + (k - 1)


def _tests_sterrett_block(bits: int, lo: int, hi: int) -> int:
    tests = 0
    while True:
        k = hi - lo
        if k == 0:
            return tests
        if k == 1:
            return tests + 1
        tests += 1
        if not _block_positive(bits, lo, hi):
            return tests
        # walk to the first positive; the last person is inferred, not
        # tested, when everyone before came back negative
        i = lo
        while True:
            if i == hi - 1:
                break
            tests += 1
            if bits >> i & 1:
                break
            i += 1
        lo = i + 1


_BLOCK_EXECUTORS = {
    Procedure.DORFMAN: _tests_dorfman_block,
    Procedure.MODIFIED_DORFMAN: _tests_modified_dorfman_block,
    Procedure.STERRETT: _tests_sterrett_block,
}


def _tests_partitioned(procedure: Procedure, sizes, bits: int) -> int:
    """Run a fixed-size procedure group by group on consecutive index blocks."""
    executor = _BLOCK_EXECUTORS[procedure]
    tests = 0
    lo = 0
    for size in sizes:
        tests += executor(bits, lo, lo + size)
        lo += size
    return tests


def _tests_nested(policy: NestedPolicy, bits: int) -> int:
    """Replay a nested policy on one infection vector.

    People are picked in index order: a binomial-set test takes the
    lowest unclassified indices, a defective-set test the lowest indices
    of the defective set.  When a defective-set test is positive, the
    untested members of the old defective set rejoin the binomial pool.
    """
    binomial = list(range(policy.n))
    defective: list[int] = []
    tests = 0
    while binomial or defective:
        if defective:
            m = len(defective)
            if m == 1:
                defective.clear()  # confirmed positive, no test spent
                continue
            x = policy.x_g[m]
            subset = defective[:x]
            tests += 1
            if any(bits >> i & 1 for i in subset):
                binomial = sorted(binomial + defective[x:])
                defective = subset
            else:
                defective = defective[x:]
        else:
            size = len(binomial)
            x = 1 if size == 1 else policy.x_h[size]
            subset = binomial[:x]
            tests += 1
            if any(bits >> i & 1 for i in subset):
                defective = subset
            binomial = binomial[x:]
    return tests


def _design_size(design) -> int:
    return design.n


def run_procedure(procedure: Procedure, design, outcome: OutcomeVector) -> int:
    """Number of tests the procedure performs on one infection vector.

    ``design`` is a :class:`Partition` for the fixed-size procedures (only
    its group sizes are used, so any size multiset can be costed under any
    of them) and a :class:`NestedPolicy` for the optimal nested procedure.
    """
    if outcome.n != _design_size(design):
        raise ValueError(
            f"outcome has {outcome.n} people but the design covers "
            f"{_design_size(design)}")
    if procedure is Procedure.OPTIMAL_NESTED:
        if not isinstance(design, NestedPolicy):
            raise UnsupportedProcedureError(
                "the optimal nested procedure needs a NestedPolicy design")
        return _tests_nested(design, outcome.bits)
    if procedure in FIXED_SIZE_PROCEDURES:
        if not isinstance(design, Partition):
            raise UnsupportedProcedureError(
                f"{procedure} needs a Partition design")
        return _tests_partitioned(procedure, design.sizes, outcome.bits)
    raise UnsupportedProcedureError(f"no executor for {procedure}")


def _describe(procedure: Procedure, design) -> str:
    if isinstance(design, Partition):
        return f"{procedure.value} on groups {list(design.sizes)}"
    return f"{procedure.value} policy designed at p={design.design_p.p}"


def exact_expected_tests(procedure: Procedure, design,
                         p: "Prevalence | float",
                         cap: int = ENUMERATION_CAP) -> EvalReport:
    """Exact expectation by enumerating every infection vector.

    Sums test counts over all 2**n vectors weighted by
    p**positives * q**negatives; exact up to float accumulation, which the
    compensated sum keeps near machine precision.
    """
    n = _design_size(design)
    if n > cap:
        raise CapacityExceededError(
            f"enumeration over 2**{n} outcomes exceeds cap of 2**{cap}")
    prev = Prevalence.of(p)
    weight_by_count = [prev.p**j * prev.q ** (n - j) for j in range(n + 1)]
    terms = (
        weight_by_count[bits.bit_count()]
        * run_procedure(procedure, design, OutcomeVector(bits, n))
        for bits in range(1 << n)
    )
    return EvalReport(
        expected_tests=math.fsum(terms),
        method="exact",
        description=_describe(procedure, design),
    )


def monte_carlo_expected_tests(procedure: Procedure, design,
                               p: "Prevalence | float",
                               replicates: int, seed: int) -> EvalReport:
    """Estimate the expectation by simulating i.i.d. infection vectors.

    Reproducibility contract: vectors come from a Philox generator keyed
    by ``seed``, with each replicate's row padded to a whole number of
    counter blocks.  Replicate r therefore occupies counter blocks
    ``[r * w, (r + 1) * w)`` where ``w = ceil(n / 4)``, so workers splitting
    the replicate range reproduce the serial stream exactly by advancing
    the counter to their first block.
    """
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    n = _design_size(design)
    prev = Prevalence.of(p)
    counts = np.empty(replicates)
    if n == 0:
        counts[:] = 0.0
    else:
        width = 4 * math.ceil(n / 4)
        gen = np.random.Generator(np.random.Philox(key=seed))
        done = 0
        while done < replicates:
            rows = min(_MC_CHUNK_ROWS, replicates - done)
            uniforms = gen.random((rows, width))
            packed = np.packbits(uniforms[:, :n] < prev.p, axis=1,
                                 bitorder="little")
            for r in range(rows):
                bits = int.from_bytes(packed[r].tobytes(), "little")
                counts[done + r] = run_procedure(
                    procedure, design, OutcomeVector(bits, n))
            done += rows
    mean = float(counts.mean())
    if replicates > 1:
        std_error = float(counts.std(ddof=1) / math.sqrt(replicates))
    else:
        std_error = float("nan")
    return EvalReport(
        expected_tests=mean,
        method="monte_carlo",
        description=_describe(procedure, design),
        replicates=replicates,
        seed=seed,
        std_error=std_error,
    )


def evaluate_policy_mismatch(policy: NestedPolicy,
                             p_true: "Prevalence | float") -> float:
    """Expected tests of a frozen nested policy under the true prevalence.

    The policy's split sizes stay exactly as designed; only the transition
    probabilities use the true prevalence.  For a binomial set of size n
    the designed split x turns negative with probability q**x; for a
    defective set of size m the designed subset x is entirely negative
    with probability (q**x - q**m) / (1 - q**m), and otherwise becomes the
    new defective set while the remainder rejoins the binomial pool.
    Evaluating at the design prevalence recovers the policy's own value
    table.
    """
    truth = Prevalence.of(p_true)
    n_max = policy.n
    if n_max == 0:
        return 0.0
    qt = truth.q ** np.arange(n_max + 1)

    eh = np.zeros(n_max + 1)
    eh[1] = 1.0
    # eg[m, n]: expected tests with a defective set of m among n unclassified
    eg = np.zeros((n_max + 1, n_max + 1))
    for n in range(1, n_max + 1):
        eg[1, n] = eh[n - 1]
        for m in range(2, n + 1):
            x = policy.x_g[m]
            denom = 1.0 - qt[m]
            all_clear = (qt[x] - qt[m]) / denom
            some_positive = (1.0 - qt[x]) / denom
            eg[m, n] = 1.0 + all_clear * eg[m - x, n - x] + some_positive * eg[x, n]
        if n >= 2:
            x = policy.x_h[n]
            eh[n] = 1.0 + qt[x] * eh[n - x] + (1.0 - qt[x]) * eg[x, n]
    return float(eh[n_max])
