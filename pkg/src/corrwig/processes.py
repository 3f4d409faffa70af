"""Stationary diagonal processes and their exact covariance models.

A process spec describes the law of the entries along one matrix diagonal.
All variants are normalized to mean 0 and variance 1 per entry:

* ``IID``: independent standard normals.
* ``GaussAR1``: stationary first-order autoregressive Gaussian process,
  autocovariance rho**tau.
* ``FiniteMarkov``: stationary reversible ergodic finite-state chain with
  affinely rescaled state values.
* ``ConstantDiagonal``: one standard normal draw repeated along the whole
  diagonal (the classic Toeplitz case, which has a non-summable
  autocovariance).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError, NumericalError, UnsupportedModelError
from .streams import standard_normals

_ROW_SUM_TOL = 1e-12
_STATIONARY_TOL = 1e-10
_DETAILED_BALANCE_TOL = 1e-10
_DEGENERATE_VAR_TOL = 1e-14


class MarkovChainSpec:
    """A stationary, reversible, ergodic finite-state chain.

    Construction takes raw state values and a row-stochastic transition
    matrix.  The stationary distribution is solved for (never supplied),
    and the states are affinely rescaled so the stationary law has mean 0
    and variance 1.  Chains that are not reversible, not ergodic, or
    degenerate after centering are rejected.
    """

    def __init__(self, states, transition):
        raw_states = np.asarray(states, dtype=float)
        transition = np.asarray(transition, dtype=float)
        if raw_states.ndim != 1 or raw_states.size < 1:
            raise ConfigurationError("states must be a nonempty 1-d sequence")
        n = raw_states.size
        if transition.shape != (n, n):
            raise ConfigurationError(
                f"transition must be {n}x{n} to match {n} states, got {transition.shape}"
            )
        if np.any(transition < 0.0):
            raise ConfigurationError("transition probabilities must be nonnegative")
        row_sums = transition.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > _ROW_SUM_TOL):
            raise ConfigurationError("transition rows must sum to 1")

        support = transition > 0.0
        if not _strongly_connected(support):
            raise ConfigurationError("chain is not irreducible")
        if _graph_period(support) != 1:
            raise ConfigurationError("chain is periodic")

        pi = _solve_stationary(transition)
        if np.any(np.abs(pi @ transition - pi) > _STATIONARY_TOL):
            raise ConfigurationError("stationary distribution residual too large")
        balance = pi[:, None] * transition - (pi[:, None] * transition).T
        if np.max(np.abs(balance)) > _DETAILED_BALANCE_TOL:
            raise ConfigurationError("chain violates detailed balance (not reversible)")

        mean = float(pi @ raw_states)
        centered = raw_states - mean
        var = float(pi @ centered**2)
        if var <= _DEGENERATE_VAR_TOL:
            raise ConfigurationError("all states coincide after centering (degenerate chain)")

        self.states = centered / math.sqrt(var)
        self.transition = transition
        self.stationary = pi
        self._cum_pi = np.cumsum(pi)
        self._cum_rows = [list(np.cumsum(row)) for row in transition]
        self._value_list = list(self.states)

    @property
    def n_states(self) -> int:
        return self.states.size

    def spectral_decomposition(self):
        """Eigenvalues of the transition matrix and the nonnegative weights
        of the autocovariance expansion cov(tau) = sum_l w_l * lam_l**tau.

        Reversibility makes D^(1/2) P D^(-1/2) symmetric (D = diag(pi)),
        so the eigenvalues are real and the weights are squares.
        """
        sqrt_pi = np.sqrt(self.stationary)
        sym = sqrt_pi[:, None] * self.transition / sqrt_pi[None, :]
        sym = 0.5 * (sym + sym.T)
        lam, vec = np.linalg.eigh(sym)
        g = vec.T @ (sqrt_pi * self.states)
        return lam, g**2

    def to_dict(self) -> dict:
        return {
            "states": [float(s) for s in self.states],
            "transition": [[float(p) for p in row] for row in self.transition],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MarkovChainSpec":
        try:
            return cls(data["states"], data["transition"])
        except KeyError as exc:
            raise ConfigurationError(f"chain spec missing field {exc}") from exc

    def __eq__(self, other):
        return (
            isinstance(other, MarkovChainSpec)
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.transition, other.transition)
        )

    def __repr__(self):
        return f"MarkovChainSpec(states={self.states.tolist()})"


def two_state_chain(flip_probability: float) -> MarkovChainSpec:
    """Symmetric two-state chain on +-1 that flips with the given probability."""
    q = float(flip_probability)
    if not 0.0 < q < 1.0:
        raise ConfigurationError(f"flip probability must lie in (0, 1), got {q}")
    return MarkovChainSpec([-1.0, 1.0], [[1.0 - q, q], [q, 1.0 - q]])


@dataclass(frozen=True)
class IID:
    kind = "iid"


@dataclass(frozen=True)
class GaussAR1:
    rho: float
    kind = "ar1"

    def __post_init__(self):
        if not abs(self.rho) < 1.0:
            raise ConfigurationError(f"AR(1) requires |rho| < 1, got {self.rho}")


@dataclass(frozen=True)
class FiniteMarkov:
    chain: MarkovChainSpec
    kind = "markov"


@dataclass(frozen=True)
class ConstantDiagonal:
    kind = "toeplitz"


ProcessSpec = Union[IID, GaussAR1, FiniteMarkov, ConstantDiagonal]


def process_to_dict(process: ProcessSpec) -> dict:
    if isinstance(process, IID):
        return {"kind": "iid"}
    if isinstance(process, GaussAR1):
        return {"kind": "ar1", "rho": process.rho}
    if isinstance(process, FiniteMarkov):
        return {"kind": "markov", **process.chain.to_dict()}
    if isinstance(process, ConstantDiagonal):
        return {"kind": "toeplitz"}
    raise ConfigurationError(f"unknown process {process!r}")


def process_from_dict(data: dict) -> ProcessSpec:
    kind = data.get("kind")
    if kind == "iid":
        return IID()
    if kind == "ar1":
        if "rho" not in data:
            raise ConfigurationError("ar1 process requires a 'rho' field")
        return GaussAR1(float(data["rho"]))
    if kind == "markov":
        return FiniteMarkov(MarkovChainSpec.from_dict(data))
    if kind == "toeplitz":
        return ConstantDiagonal()
    raise ConfigurationError(f"unknown process kind {kind!r}")


def generate_ar1_diagonal(length: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) path of the given length.

    The first value is drawn from the exact stationary law N(0,1) (no
    burn-in); subsequent values follow a_next = rho*a + sqrt(1-rho^2)*xi.
    """
    if length < 1:
        raise ConfigurationError(f"length must be >= 1, got {length}")
    if not abs(rho) < 1.0:
        raise ConfigurationError(f"AR(1) requires |rho| < 1, got {rho}")
    z = standard_normals(rng, length)
    x = z * math.sqrt(1.0 - rho * rho)
    x[0] = z[0]
    return lfilter([1.0], [1.0, -rho], x)


def generate_markov_diagonal(
    length: int, chain: MarkovChainSpec, rng: np.random.Generator
) -> np.ndarray:
    """Stationary chain path: initial state from pi, then transition steps."""
    if length < 1:
        raise ConfigurationError(f"length must be >= 1, got {length}")
    us = rng.random(length).tolist()
    cum_pi = chain._cum_pi
    cum_rows = chain._cum_rows
    values = chain._value_list
    state = int(np.searchsorted(cum_pi, us[0], side="right"))
    out = [0.0] * length
    out[0] = values[state]
    for p in range(1, length):
        state = bisect.bisect_right(cum_rows[state], us[p])
        out[p] = values[state]
    return np.array(out)


def markov_covariance(chain: MarkovChainSpec, tau: int) -> float:
    """Exact lag-tau autocovariance sum_ij s_i s_j pi_i P^tau(i,j)."""
    if tau < 0:
        raise ConfigurationError(f"tau must be nonnegative, got {tau}")
    p_tau = np.linalg.matrix_power(chain.transition, tau)
    weighted = chain.stationary * chain.states
    return float(weighted @ p_tau @ chain.states)


@dataclass(frozen=True)
class CovarianceModel:
    """Along-diagonal autocovariance tau -> cov(tau) of a process.

    `summable` says whether sum_tau |cov(tau)| converges; `abs_sum` holds
    the value when it does.  `gaussian` marks processes whose entries are
    jointly Gaussian, for which Wick-formula moment oracles apply.
    """

    cov: Callable[[int], float]
    summable: bool
    abs_sum: Optional[float]
    gaussian: bool
    kind: str = field(default="", compare=False)

    def table(self, max_tau: int) -> np.ndarray:
        return np.array([self.cov(t) for t in range(max_tau + 1)])


def _markov_model(chain: MarkovChainSpec) -> CovarianceModel:
    lam, weights = chain.spectral_decomposition()

    def cov(tau: int) -> float:
        if tau < 0:
            raise ConfigurationError(f"tau must be nonnegative, got {tau}")
        return float(weights @ (lam**tau))

    # Truncate sum_tau |cov(tau)| once the certified geometric tail bound
    # (from the second-largest eigenvalue modulus) drops below 1e-12.  An
    # ergodic chain has exactly one unit eigenvalue, and its weight is 0
    # because the states are centered under the stationary law.
    order = np.argsort(np.abs(lam))
    rest = order[:-1]
    slem = float(np.max(np.abs(lam[rest]), initial=0.0))
    if slem >= 1.0:
        raise NumericalError("chain has a repeated unit eigenvalue modulus")
    decaying_weight = float(np.sum(weights[rest]))
    total = 0.0
    for tau in range(1_000_000):
        total += abs(cov(tau))
        tail = decaying_weight * slem ** (tau + 1) / (1.0 - slem) if slem > 0.0 else 0.0
        if tail < 1e-12:
            break
    else:
        raise NumericalError(
            "covariance sum certificate did not converge (mixing too slow)"
        )
    return CovarianceModel(cov=cov, summable=True, abs_sum=total, gaussian=False, kind="markov")


def covariance_model(process: ProcessSpec) -> CovarianceModel:
    """Exact covariance model of a process spec, with summability flag."""
    if isinstance(process, IID):
        return CovarianceModel(
            cov=lambda tau: 1.0 if tau == 0 else 0.0,
            summable=True,
            abs_sum=1.0,
            gaussian=True,
            kind="iid",
        )
    if isinstance(process, GaussAR1):
        rho = process.rho
        return CovarianceModel(
            cov=lambda tau: rho**tau,
            summable=True,
            abs_sum=1.0 / (1.0 - abs(rho)),
            gaussian=True,
            kind="ar1",
        )
    if isinstance(process, ConstantDiagonal):
        return CovarianceModel(
            cov=lambda tau: 1.0,
            summable=False,
            abs_sum=None,
            gaussian=True,
            kind="toeplitz",
        )
    if isinstance(process, FiniteMarkov):
        return _markov_model(process.chain)
    raise UnsupportedModelError(f"unknown process {process!r}")


def _solve_stationary(transition: np.ndarray) -> np.ndarray:
    # (P^T - I) x = 0 with sum(x) = 1 as a stacked least-squares system.
    n = transition.shape[0]
    a = np.vstack([transition.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.any(pi < -1e-12):
        raise ConfigurationError("stationary distribution has negative mass")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _strongly_connected(support: np.ndarray) -> bool:
    return _all_reachable(support) and _all_reachable(support.T)


def _all_reachable(support: np.ndarray) -> bool:
    n = support.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in np.nonzero(support[u])[0]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


def _graph_period(support: np.ndarray) -> int:
    # gcd of (level[u] + 1 - level[v]) over edges of a strongly connected
    # digraph equals the common cycle-length gcd.
    n = support.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    queue = [0]
    while queue:
        u = queue.pop(0)
        for v in np.nonzero(support[u])[0]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    g = 0
    for u in range(n):
        for v in np.nonzero(support[u])[0]:
            g = math.gcd(g, int(level[u] + 1 - level[v]))
    return g
