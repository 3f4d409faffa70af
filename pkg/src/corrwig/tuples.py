"""Cyclically consistent index tuples and exact trace-moment oracles.

A consistent tuple is a cycle of index pairs P_j = (p_j, q_j) with
q_j = p_{j+1} (indices mod k); these are exactly the index sequences that
appear when expanding tr(X^k).  Entry P_j addresses the matrix diagonal
r_j = |q_j - p_j| at along-diagonal position min(p_j, q_j).

The gap pattern of a tuple is the partition of {1,...,k} grouping positions
with equal |q_j - p_j|.  Counting tuples by exact gap pattern, with or
without the extra requirement that equivalent positions step in opposite
directions (q_i - p_i = -(q_j - p_j)), is what the counting experiments
consume.  For jointly Gaussian fields the expected entry products follow
the Wick pairing formula, which gives exact finite-size expected trace
moments by full enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterator

import numpy as np

from .errors import ConfigurationError, EnumerationGuardError, UnsupportedModelError
from .partitions import Partition, partition_from_labels
from .processes import CovarianceModel

TUPLE_GUARD = 10**7
WICK_ORDER_GUARD = 10


@dataclass(frozen=True)
class ConsistentTuple:
    pairs: tuple

    def __post_init__(self):
        pairs = tuple((int(p), int(q)) for p, q in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ConfigurationError("tuple must have at least one pair")
        for j, (p, q) in enumerate(pairs):
            if p < 1 or q < 1:
                raise ConfigurationError(f"indices must be >= 1, got pair {(p, q)}")
            nxt = pairs[(j + 1) % len(pairs)]
            if q != nxt[0]:
                raise ConfigurationError(
                    f"pair {j + 1} ends at {q} but pair {(j + 1) % len(pairs) + 1} "
                    f"starts at {nxt[0]}"
                )

    @property
    def k(self) -> int:
        return len(self.pairs)

    def gaps(self) -> tuple:
        return tuple(abs(q - p) for p, q in self.pairs)

    def signed_gaps(self) -> tuple:
        return tuple(q - p for p, q in self.pairs)


def _check_tuple_guard(n: int, k: int) -> None:
    if n < 1 or k < 1:
        raise ConfigurationError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if n**k > TUPLE_GUARD:
        raise EnumerationGuardError(
            f"enumeration of n^k = {n}^{k} tuples exceeds the guard {TUPLE_GUARD}"
        )


def enumerate_consistent_tuples(n: int, k: int) -> Iterator[ConsistentTuple]:
    """All n^k consistent tuples over {1,...,n}; the p_j are free choices."""
    _check_tuple_guard(n, k)
    for ps in product(range(1, n + 1), repeat=k):
        yield ConsistentTuple(tuple((ps[j], ps[(j + 1) % k]) for j in range(k)))


def induced_partition(t: ConsistentTuple) -> Partition:
    """Partition of {1,...,k} grouping positions by equal absolute gap."""
    return partition_from_labels(t.gaps())


def _tuple_batches(n: int, k: int):
    """Vectorized sweep over all consistent tuples, batched by p_1.

    Yields (ps, qs): length-k lists of equal-length int arrays holding the
    pair coordinates, 1-based.
    """
    if k == 1:
        p = np.arange(1, n + 1, dtype=np.int64)
        yield [p], [p]
        return
    base = np.indices((n,) * (k - 1)).reshape(k - 1, -1).astype(np.int64) + 1
    width = base.shape[1]
    for p1 in range(1, n + 1):
        ps = [np.full(width, p1, dtype=np.int64)]
        ps.extend(base[i] for i in range(k - 1))
        qs = ps[1:] + [ps[0]]
        yield ps, qs


def _block_pairs(pattern: Partition):
    same = [
        (i, j)
        for block in pattern.blocks
        for a, i in enumerate(block)
        for j in block[a + 1 :]
    ]
    reps = [block[0] for block in pattern.blocks]
    return same, reps


def _pattern_masks(ps, qs, pattern: Partition):
    gaps = [np.abs(q - p) for p, q in zip(ps, qs)]
    signed = [q - p for p, q in zip(ps, qs)]
    same, reps = _block_pairs(pattern)
    mask = np.ones(len(ps[0]), dtype=bool)
    for i, j in same:
        mask &= gaps[i - 1] == gaps[j - 1]
    for a in range(len(reps)):
        for b in range(a + 1, len(reps)):
            mask &= gaps[reps[a] - 1] != gaps[reps[b] - 1]
    reflected = mask.copy()
    for i, j in same:
        reflected &= signed[i - 1] == -signed[j - 1]
    return mask, reflected


def pattern_tuple_counts(pattern: Partition, n: int) -> tuple:
    """Exact (#matching, #reflected) tuple counts for one gap pattern.

    A tuple matches when its induced partition equals `pattern` exactly
    (equal gaps across different blocks disqualify).  The reflected subset
    additionally requires every pair of equivalent positions to traverse
    opposite signed gaps, q_i - p_i = -(q_j - p_j).
    """
    k = pattern.k
    _check_tuple_guard(n, k)
    count = 0
    count_reflected = 0
    for ps, qs in _tuple_batches(n, k):
        mask, reflected = _pattern_masks(ps, qs, pattern)
        count += int(mask.sum())
        count_reflected += int(reflected.sum())
    return count, count_reflected


def count_pattern_tuples(pattern: Partition, n: int) -> int:
    return pattern_tuple_counts(pattern, n)[0]


def count_reflected_tuples(pattern: Partition, n: int) -> int:
    return pattern_tuple_counts(pattern, n)[1]


def _pairings(indices: list) -> Iterator[tuple]:
    # First index pairs with each remaining one; (k-1)!! leaves total.
    if not indices:
        yield ()
        return
    first = indices[0]
    for w in range(1, len(indices)):
        partner = indices[w]
        rest = indices[1:w] + indices[w + 1 :]
        for sub in _pairings(rest):
            yield ((first, partner),) + sub


def _require_gaussian(model: CovarianceModel, k: int) -> None:
    if not model.gaussian:
        raise UnsupportedModelError(
            "Wick pairing expectations require a jointly Gaussian process"
        )
    if k > WICK_ORDER_GUARD:
        raise EnumerationGuardError(
            f"Wick sums limited to order <= {WICK_ORDER_GUARD}, got {k}"
        )


def expected_product_gaussian(t: ConsistentTuple, model: CovarianceModel) -> float:
    """E[a(P_1) * ... * a(P_k)] for a jointly Gaussian field.

    Wick pairing sum: entries on different diagonals are independent, and
    entries on one diagonal at displacement tau have covariance cov(tau).
    """
    _require_gaussian(model, t.k)
    if t.k % 2 == 1:
        return 0.0
    entries = [(abs(q - p), min(p, q)) for p, q in t.pairs]

    def wick(indices: list) -> float:
        if not indices:
            return 1.0
        first = indices[0]
        total = 0.0
        for w in range(1, len(indices)):
            j = indices[w]
            diag_a, pos_a = entries[first]
            diag_b, pos_b = entries[j]
            if diag_a != diag_b:
                continue
            c = model.cov(abs(pos_a - pos_b))
            if c != 0.0:
                total += c * wick(indices[1:w] + indices[w + 1 :])
        return total

    return wick(list(range(t.k)))


def _wick_batch(ps, qs, pairings, cov_table: np.ndarray) -> np.ndarray:
    diag = [np.abs(q - p) for p, q in zip(ps, qs)]
    pos = [np.minimum(p, q) for p, q in zip(ps, qs)]
    total = np.zeros(len(ps[0]))
    for pairing in pairings:
        term = np.ones(len(ps[0]))
        for i, j in pairing:
            factor = np.where(
                diag[i] == diag[j], cov_table[np.abs(pos[i] - pos[j])], 0.0
            )
            term *= factor
        total += term
    return total


def exact_expected_trace_moment(n: int, k: int, model: CovarianceModel) -> float:
    """Exact E[(1/n) tr(X^k)] at finite n for a Gaussian process model:
    n^-(1+k/2) times the Wick expectation summed over all consistent tuples."""
    _check_tuple_guard(n, k)
    _require_gaussian(model, k)
    if k % 2 == 1:
        return 0.0  # odd joint moments of a centered Gaussian field vanish
    cov_table = model.table(n - 1)
    pairings = list(_pairings(list(range(k))))
    batch_sums = [
        float(_wick_batch(ps, qs, pairings, cov_table).sum())
        for ps, qs in _tuple_batches(n, k)
    ]
    return math.fsum(batch_sums) / n ** (1.0 + k / 2.0)


def reflected_abs_expectation_sum(
    pattern: Partition, n: int, model: CovarianceModel
) -> float:
    """Sum of |E[a(P_1)...a(P_k)]| over the reflected tuples of one gap
    pattern; the quantity whose growth the crossing-suppression experiment
    tracks."""
    k = pattern.k
    _check_tuple_guard(n, k)
    _require_gaussian(model, k)
    cov_table = model.table(n - 1)
    pairings = list(_pairings(list(range(k))))
    batch_sums = []
    for ps, qs in _tuple_batches(n, k):
        _, reflected = _pattern_masks(ps, qs, pattern)
        if not reflected.any():
            continue
        sub_ps = [p[reflected] for p in ps]
        sub_qs = [q[reflected] for q in qs]
        values = _wick_batch(sub_ps, sub_qs, pairings, cov_table)
        batch_sums.append(float(np.abs(values).sum()))
    return math.fsum(batch_sums)
