import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrwig.errors import (
    ConfigurationError,
    EnumerationGuardError,
    UnsupportedModelError,
)
from corrwig.partitions import Partition, enumerate_partitions
from corrwig.processes import (
    ConstantDiagonal,
    FiniteMarkov,
    GaussAR1,
    IID,
    covariance_model,
    two_state_chain,
)
from corrwig.tuples import (
    ConsistentTuple,
    count_pattern_tuples,
    count_reflected_tuples,
    enumerate_consistent_tuples,
    exact_expected_trace_moment,
    expected_product_gaussian,
    induced_partition,
    pattern_tuple_counts,
    reflected_abs_expectation_sum,
)

IID_MODEL = covariance_model(IID())
AR_MODEL = covariance_model(GaussAR1(0.5))
TOEPLITZ_MODEL = covariance_model(ConstantDiagonal())


def brute_counts(n, k):
    """Group all consistent tuples by induced partition; also count the
    reflected subset (equivalent positions stepping in opposite directions)."""
    matching = Counter()
    reflected = Counter()
    for t in enumerate_consistent_tuples(n, k):
        pattern = induced_partition(t)
        matching[pattern.blocks] += 1
        signed = t.signed_gaps()
        ok = all(
            signed[i - 1] == -signed[j - 1]
            for block in pattern.blocks
            for a, i in enumerate(block)
            for j in block[a + 1 :]
        )
        if ok:
            reflected[pattern.blocks] += 1
    return matching, reflected


# ---------------------------------------------------------------------------
# tuples and induced partitions
# ---------------------------------------------------------------------------


def test_tuple_validation():
    ConsistentTuple(((1, 2), (2, 1)))
    with pytest.raises(ConfigurationError):
        ConsistentTuple(((1, 2), (3, 1)))  # breaks the chain
    with pytest.raises(ConfigurationError):
        ConsistentTuple(((1, 2), (2, 2)))  # does not close the cycle
    with pytest.raises(ConfigurationError):
        ConsistentTuple(((0, 1), (1, 0)))  # indices must be >= 1


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_consistent_tuples(3, 1)) == 3
    assert sum(1 for _ in enumerate_consistent_tuples(2, 2)) == 4
    assert sum(1 for _ in enumerate_consistent_tuples(3, 3)) == 27
    for t in enumerate_consistent_tuples(3, 1):
        assert t.pairs[0][0] == t.pairs[0][1]  # cyclicity forces q_1 = p_1


def test_enumeration_guard():
    with pytest.raises(EnumerationGuardError):
        next(enumerate_consistent_tuples(100, 4))
    with pytest.raises(EnumerationGuardError):
        count_pattern_tuples(Partition(((1, 2), (3, 4))), 100)
    with pytest.raises(ConfigurationError):
        next(enumerate_consistent_tuples(0, 2))


def test_induced_partition_examples():
    t2 = ConsistentTuple(((1, 2), (2, 1)))
    assert induced_partition(t2) == Partition(((1, 2),))

    t3 = ConsistentTuple(((1, 2), (2, 4), (4, 1)))
    assert induced_partition(t3) == Partition(((1,), (2,), (3,)))

    t4 = ConsistentTuple(((1, 3), (3, 1), (1, 2), (2, 1)))
    assert induced_partition(t4) == Partition(((1, 2), (3, 4)))


# ---------------------------------------------------------------------------
# pattern counts
# ---------------------------------------------------------------------------


def test_k2_closed_forms():
    pair = Partition(((1, 2),))
    singletons = Partition(((1,), (2,)))
    for n in range(2, 11):
        assert pattern_tuple_counts(pair, n) == (n * n, n * n)
        assert pattern_tuple_counts(singletons, n) == (0, 0)


def test_counts_match_brute_force():
    for n, k in ((2, 2), (3, 2), (4, 3), (3, 4), (4, 4), (2, 5)):
        matching, reflected = brute_counts(n, k)
        for pattern in enumerate_partitions(k):
            assert count_pattern_tuples(pattern, n) == matching.get(pattern.blocks, 0)
            assert count_reflected_tuples(pattern, n) == reflected.get(pattern.blocks, 0)


def test_pattern_counts_partition_all_tuples():
    for n, k in ((2, 2), (3, 3), (4, 4), (5, 3)):
        total = sum(count_pattern_tuples(p, n) for p in enumerate_partitions(k))
        assert total == n**k


@given(n=st.integers(min_value=1, max_value=4), k=st.integers(min_value=1, max_value=4))
@settings(max_examples=16, deadline=None)
def test_reflected_subset_property(n, k):
    for pattern in enumerate_partitions(k):
        matching, reflected = pattern_tuple_counts(pattern, n)
        assert 0 <= reflected <= matching


def test_noncrossing_ratio_grows_toward_one():
    # k=4 dominant patterns against the n^3 scale
    for blocks in (((1, 2), (3, 4)), ((1, 4), (2, 3))):
        pattern = Partition(blocks)
        ratios = [count_reflected_tuples(pattern, n) / n**3 for n in (5, 10, 15, 20)]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert 0.8 < ratios[-1] <= 1.0


# ---------------------------------------------------------------------------
# Wick expectations
# ---------------------------------------------------------------------------


def test_same_entry_twice_has_unit_expectation():
    t = ConsistentTuple(((1, 2), (2, 1)))
    assert expected_product_gaussian(t, IID_MODEL) == 1.0
    assert expected_product_gaussian(t, AR_MODEL) == 1.0
    assert expected_product_gaussian(t, TOEPLITZ_MODEL) == 1.0


def test_entries_on_different_diagonals_are_uncorrelated():
    t = ConsistentTuple(((1, 2), (2, 4), (4, 1)))
    assert expected_product_gaussian(t, AR_MODEL) == 0.0  # odd order
    t2 = ConsistentTuple(((1, 2), (2, 5), (5, 6), (6, 1)))
    # gaps 1, 3, 1, 5: middle pair sits alone on its diagonals
    assert expected_product_gaussian(t2, IID_MODEL) == 0.0


def test_wick_four_entries_one_diagonal():
    rho = 0.5
    t = ConsistentTuple(((1, 3), (3, 5), (5, 3), (3, 1)))
    # entries on diagonal 2 at positions 1, 3, 3, 1
    expected = rho**4 + rho**4 + 1.0
    assert expected_product_gaussian(t, AR_MODEL) == pytest.approx(expected, rel=1e-14)


def test_wick_same_value_fourth_power():
    # Toeplitz repeats one draw, so four entries on a diagonal give E[a^4] = 3
    t = ConsistentTuple(((1, 2), (2, 3), (3, 2), (2, 1)))
    assert expected_product_gaussian(t, TOEPLITZ_MODEL) == 3.0


def test_wick_matches_monte_carlo():
    rho = 0.5
    t = ConsistentTuple(((1, 3), (3, 5), (5, 3), (3, 1)))
    exact = expected_product_gaussian(t, AR_MODEL)
    rng = np.random.default_rng(123)
    m = 1_000_000
    path = np.empty((m, 3))
    path[:, 0] = rng.standard_normal(m)
    scale = math.sqrt(1.0 - rho * rho)
    for p in (1, 2):
        path[:, p] = rho * path[:, p - 1] + scale * rng.standard_normal(m)
    # positions 1 and 3 on the diagonal correspond to columns 0 and 2
    products = path[:, 0] ** 2 * path[:, 2] ** 2
    se = products.std(ddof=1) / math.sqrt(m)
    assert abs(products.mean() - exact) < 4.0 * se


def test_wick_rejects_non_gaussian_and_large_order():
    t = ConsistentTuple(((1, 2), (2, 1)))
    markov = covariance_model(FiniteMarkov(two_state_chain(0.25)))
    with pytest.raises(UnsupportedModelError):
        expected_product_gaussian(t, markov)
    twelve = ConsistentTuple(tuple(((1, 1),) * 12))
    with pytest.raises(EnumerationGuardError):
        expected_product_gaussian(twelve, IID_MODEL)


# ---------------------------------------------------------------------------
# exact expected trace moments
# ---------------------------------------------------------------------------


def test_exact_trace_moment_trivial_cases():
    assert exact_expected_trace_moment(1, 2, IID_MODEL) == 1.0
    assert exact_expected_trace_moment(2, 2, IID_MODEL) == 1.0
    assert exact_expected_trace_moment(5, 3, IID_MODEL) == 0.0
    assert exact_expected_trace_moment(1, 4, IID_MODEL) == pytest.approx(3.0)


def test_exact_trace_moment_second_order_always_one():
    # E[(1/n) tr X^2] = (1/n^2) * sum of E[a^2] over all n^2 entries = 1
    for model in (IID_MODEL, AR_MODEL, TOEPLITZ_MODEL):
        for n in (2, 3, 8):
            assert exact_expected_trace_moment(n, 2, model) == pytest.approx(1.0, rel=1e-12)


def test_exact_trace_moment_matches_tuple_sum():
    for model in (IID_MODEL, AR_MODEL):
        for n, k in ((3, 4), (4, 4), (5, 2)):
            direct = math.fsum(
                expected_product_gaussian(t, model)
                for t in enumerate_consistent_tuples(n, k)
            ) / n ** (1 + k / 2)
            assert exact_expected_trace_moment(n, k, model) == pytest.approx(direct, rel=1e-12)


def test_exact_trace_moment_approaches_catalan_limit():
    m4_8 = exact_expected_trace_moment(8, 4, IID_MODEL)
    m4_32 = exact_expected_trace_moment(32, 4, IID_MODEL)
    assert abs(m4_32 - 2.0) < abs(m4_8 - 2.0)
    assert abs(m4_32 - 2.0) < 0.15


def test_exact_trace_moment_monte_carlo_cross_check():
    # small-replica version of the oracle equivalence check
    from corrwig.ensemble import EnsembleConfig, sample_matrix
    from corrwig.spectral import eigenvalues, trace_moment

    n = 6
    replicas = 3000
    for process, model in ((IID(), IID_MODEL), (GaussAR1(0.5), AR_MODEL)):
        config = EnsembleConfig(n=n, process=process, seed=77)
        values = np.empty(replicas)
        for j in range(replicas):
            spectrum = eigenvalues(sample_matrix(config, replica=j))
            values[j] = trace_moment(spectrum, 4)
        exact = exact_expected_trace_moment(n, 4, model)
        se = values.std(ddof=1) / math.sqrt(replicas)
        assert abs(values.mean() - exact) < 4.0 * se


def test_exact_trace_moment_guards():
    with pytest.raises(EnumerationGuardError):
        exact_expected_trace_moment(100, 4, IID_MODEL)
    markov = covariance_model(FiniteMarkov(two_state_chain(0.25)))
    with pytest.raises(UnsupportedModelError):
        exact_expected_trace_moment(4, 2, markov)


# ---------------------------------------------------------------------------
# crossing weight sums
# ---------------------------------------------------------------------------


def test_crossing_weight_zero_under_iid():
    crossing = Partition(((1, 3), (2, 4)))
    for n in (5, 10):
        assert reflected_abs_expectation_sum(crossing, n, IID_MODEL) == 0.0


def test_crossing_weight_suppressed_under_ar1():
    crossing = Partition(((1, 3), (2, 4)))
    ratios = [
        reflected_abs_expectation_sum(crossing, n, AR_MODEL) / n**3
        for n in (5, 10, 20, 40)
    ]
    assert all(r > 0.0 for r in ratios)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_crossing_weight_matches_direct_sum():
    crossing = Partition(((1, 3), (2, 4)))
    n = 6
    direct = 0.0
    for t in enumerate_consistent_tuples(n, 4):
        pattern = induced_partition(t)
        if pattern != crossing:
            continue
        signed = t.signed_gaps()
        if signed[0] != -signed[2] or signed[1] != -signed[3]:
            continue
        direct += abs(expected_product_gaussian(t, AR_MODEL))
    assert reflected_abs_expectation_sum(crossing, n, AR_MODEL) == pytest.approx(
        direct, rel=1e-12
    )
