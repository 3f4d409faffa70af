import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrwig.errors import ConfigurationError
from corrwig.processes import (
    ConstantDiagonal,
    FiniteMarkov,
    GaussAR1,
    IID,
    MarkovChainSpec,
    covariance_model,
    generate_ar1_diagonal,
    generate_markov_diagonal,
    markov_covariance,
    process_from_dict,
    process_to_dict,
    two_state_chain,
)
from corrwig.streams import substream


# ---------------------------------------------------------------------------
# AR(1)
# ---------------------------------------------------------------------------


def test_ar1_requires_contractive_rho():
    with pytest.raises(ConfigurationError):
        GaussAR1(1.0)
    with pytest.raises(ConfigurationError):
        GaussAR1(-1.2)
    with pytest.raises(ConfigurationError):
        generate_ar1_diagonal(10, 1.0, substream(0))


def test_ar1_rho_zero_is_iid():
    # With rho = 0 the recursion gives back the innovations themselves.
    rng = substream(5, 0, 0)
    path = generate_ar1_diagonal(1000, 0.0, rng)
    iid = substream(5, 0, 0)
    from corrwig.streams import standard_normals

    assert np.allclose(path, standard_normals(iid, 1000))


def test_ar1_recursion_identity():
    rho = 0.73
    path = generate_ar1_diagonal(500, rho, substream(17, 0, 3))
    # innovations implied by the recursion must be N(0,1)-scaled
    innov = (path[1:] - rho * path[:-1]) / math.sqrt(1.0 - rho * rho)
    assert abs(innov.mean()) < 4.0 / math.sqrt(innov.size)
    assert abs(innov.var() - 1.0) < 4.0 * math.sqrt(2.0 / innov.size)


def test_ar1_empirical_covariance_matches_power_law():
    rho = 0.5
    replicas = 400
    length = 64
    paths = [generate_ar1_diagonal(length, rho, substream(400, j, 0)) for j in range(replicas)]
    for tau in (1, 2, 3, 4, 5):
        estimates = np.asarray(
            [float(np.mean(p[: length - tau] * p[tau:])) for p in paths]
        )
        se = estimates.std(ddof=1) / math.sqrt(replicas)
        assert abs(estimates.mean() - rho**tau) < 3.0 * se


def test_ar1_long_run_mean_and_variance():
    rho = 0.9
    path = generate_ar1_diagonal(1_000_000, rho, substream(31, 0, 0))
    # long-run standard error of the mean scales with sqrt((1+rho)/(1-rho)/m)
    se_mean = math.sqrt((1.0 + rho) / (1.0 - rho) / path.size)
    assert abs(path.mean()) < 3.0 * se_mean
    assert abs(path.var() - 1.0) < 0.02


def test_ar1_stationarity_along_path():
    # lag-2 covariance estimated at the start and the middle of the path
    rho = 0.6
    replicas = 600
    starts, middles = [], []
    for j in range(replicas):
        path = generate_ar1_diagonal(64, rho, substream(52, j, 0))
        starts.append(path[0] * path[2])
        middles.append(path[31] * path[33])
    starts = np.asarray(starts)
    middles = np.asarray(middles)
    pooled_se = math.sqrt(starts.var(ddof=1) / replicas + middles.var(ddof=1) / replicas)
    assert abs(starts.mean() - middles.mean()) < 3.0 * pooled_se


# ---------------------------------------------------------------------------
# Markov chains
# ---------------------------------------------------------------------------


def test_two_state_chain_normalization():
    chain = two_state_chain(0.25)
    assert np.allclose(chain.stationary, [0.5, 0.5])
    assert abs(float(chain.stationary @ chain.states)) < 1e-10
    assert abs(float(chain.stationary @ chain.states**2) - 1.0) < 1e-10


def test_markov_state_rescaling():
    # raw states on an asymmetric reversible chain get centered and scaled
    transition = [[0.5, 0.5], [0.25, 0.75]]
    chain = MarkovChainSpec([10.0, 20.0], transition)
    pi = chain.stationary
    assert np.allclose(pi, [1.0 / 3.0, 2.0 / 3.0], atol=1e-12)
    assert abs(float(pi @ chain.states)) < 1e-10
    assert abs(float(pi @ chain.states**2) - 1.0) < 1e-10


def test_markov_rejects_bad_chains():
    with pytest.raises(ConfigurationError):  # rows do not sum to 1
        MarkovChainSpec([1.0, -1.0], [[0.7, 0.2], [0.3, 0.7]])
    with pytest.raises(ConfigurationError):  # negative probability
        MarkovChainSpec([1.0, -1.0], [[1.2, -0.2], [0.3, 0.7]])
    with pytest.raises(ConfigurationError):  # reducible
        MarkovChainSpec([1.0, -1.0], [[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ConfigurationError):  # periodic
        MarkovChainSpec([1.0, -1.0], [[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ConfigurationError):  # degenerate after centering
        MarkovChainSpec([3.0, 3.0], [[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ConfigurationError):  # not reversible
        MarkovChainSpec(
            [1.0, 0.0, -1.0],
            [[0.0, 0.9, 0.1], [0.1, 0.0, 0.9], [0.9, 0.1, 0.0]],
        )


def test_markov_covariance_two_state_closed_form():
    q = 0.25
    chain = two_state_chain(q)
    for tau in range(8):
        assert markov_covariance(chain, tau) == pytest.approx((1.0 - 2.0 * q) ** tau, abs=1e-12)
    assert markov_covariance(chain, 0) == pytest.approx(1.0, abs=1e-12)


def test_markov_covariance_matches_spectral_model():
    chain = MarkovChainSpec(
        [3.0, -1.0, 0.5],
        [[0.2, 0.5, 0.3], [0.25, 0.5, 0.25], [0.3, 0.5, 0.2]],
    )
    model = covariance_model(FiniteMarkov(chain))
    for tau in range(12):
        assert model.cov(tau) == pytest.approx(markov_covariance(chain, tau), abs=1e-12)


def test_markov_covariance_decays_below_threshold():
    chain = two_state_chain(0.25)
    tau = 80  # well beyond the mixing scale: 0.5^80 ~ 8e-25
    assert abs(markov_covariance(chain, tau)) < 1e-8


def test_markov_empirical_covariance_matches_exact():
    chain = two_state_chain(0.25)
    path = generate_markov_diagonal(1_000_000, chain, substream(77, 0, 0))
    exact = markov_covariance(chain, 1)
    products = path[:-1] * path[1:]
    # batch means absorb the serial correlation of the products
    batches = np.array_split(products, 50)
    means = np.array([b.mean() for b in batches])
    se = means.std(ddof=1) / math.sqrt(len(batches))
    assert abs(products.mean() - exact) < 3.0 * se


def test_markov_marginal_is_stationary():
    chain = two_state_chain(0.25)
    path = generate_markov_diagonal(200_000, chain, substream(78, 0, 0))
    assert set(np.unique(path)) == {-1.0, 1.0}
    assert abs(path.mean()) < 0.02


# ---------------------------------------------------------------------------
# covariance models
# ---------------------------------------------------------------------------


def test_covariance_models_basic_values():
    iid = covariance_model(IID())
    assert iid.cov(0) == 1.0 and iid.cov(1) == 0.0
    assert iid.summable and iid.abs_sum == 1.0 and iid.gaussian

    ar = covariance_model(GaussAR1(0.5))
    assert ar.cov(0) == 1.0 and ar.cov(3) == 0.125
    assert ar.abs_sum == pytest.approx(2.0, abs=1e-14)

    toe = covariance_model(ConstantDiagonal())
    assert toe.cov(0) == 1.0 and toe.cov(10**6) == 1.0
    assert not toe.summable and toe.abs_sum is None and toe.gaussian

    markov = covariance_model(FiniteMarkov(two_state_chain(0.25)))
    assert not markov.gaussian
    assert markov.summable
    assert markov.abs_sum == pytest.approx(2.0, abs=1e-9)  # geometric sum of 0.5^tau


@given(rho=st.floats(min_value=-0.9, max_value=0.9))
@settings(max_examples=30, deadline=None)
def test_ar1_abs_sum_is_geometric(rho):
    model = covariance_model(GaussAR1(rho))
    truncated = sum(abs(model.cov(t)) for t in range(200))
    assert model.abs_sum == pytest.approx(1.0 / (1.0 - abs(rho)), rel=1e-12)
    assert truncated == pytest.approx(model.abs_sum, rel=1e-6)


@given(rho=st.floats(min_value=-0.99, max_value=0.99))
@settings(max_examples=25, deadline=None)
def test_covariance_bounded_by_one(rho):
    model = covariance_model(GaussAR1(rho))
    assert all(abs(model.cov(t)) <= 1.0 + 1e-15 for t in range(32))


def test_unsupported_process_kind():
    with pytest.raises(ConfigurationError):
        process_from_dict({"kind": "levy"})


def test_process_dict_roundtrip():
    specs = [
        IID(),
        GaussAR1(-0.4),
        ConstantDiagonal(),
        FiniteMarkov(two_state_chain(0.3)),
    ]
    for spec in specs:
        data = process_to_dict(spec)
        back = process_from_dict(data)
        assert process_to_dict(back) == data
