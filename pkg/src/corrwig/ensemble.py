"""Random fields with independent diagonals and the scaled symmetric matrix.

A field holds one stationary process path per diagonal; diagonal r of an
n x n field carries the entries at positions (p, p+r) for p = 1..n-r, in
1-based index convention.  Each diagonal is generated from its own random
substream, so distinct diagonals are stochastically independent, and the
whole field is a deterministic function of (config, replica).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .errors import ConfigurationError
from .processes import (
    ConstantDiagonal,
    FiniteMarkov,
    GaussAR1,
    IID,
    ProcessSpec,
    covariance_model,
    generate_ar1_diagonal,
    generate_markov_diagonal,
    process_from_dict,
    process_to_dict,
)
from .streams import DEFAULT_SEED, standard_normals, substream


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    process: ProcessSpec
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"matrix dimension must be >= 1, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {"n": self.n, "seed": self.seed, "process": process_to_dict(self.process)}

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleConfig":
        missing = {"n", "seed", "process"} - set(data)
        if missing:
            raise ConfigurationError(f"config missing fields: {sorted(missing)}")
        return cls(n=int(data["n"]), process=process_from_dict(data["process"]),
                   seed=int(data["seed"]))


@dataclass(frozen=True)
class RandomField:
    """Per-diagonal entries a(p, q), 1 <= p <= q <= n."""

    n: int
    diagonals: tuple

    def entry(self, p: int, q: int) -> float:
        if not (1 <= p <= self.n and 1 <= q <= self.n):
            raise ConfigurationError(f"index ({p},{q}) outside 1..{self.n}")
        r = abs(q - p)
        return float(self.diagonals[r][min(p, q) - 1])

    def all_entries(self) -> np.ndarray:
        return np.concatenate(self.diagonals)


@dataclass(frozen=True)
class SymmetricMatrix:
    """Scaled matrix X(p,q) = a(p,q)/sqrt(n), packed by diagonal.

    Symmetry holds by storage: entry(p, q) and entry(q, p) read the same
    packed element.
    """

    n: int
    diagonals: tuple

    def entry(self, p: int, q: int) -> float:
        if not (1 <= p <= self.n and 1 <= q <= self.n):
            raise ConfigurationError(f"index ({p},{q}) outside 1..{self.n}")
        r = abs(q - p)
        return float(self.diagonals[r][min(p, q) - 1])

    def dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for r, seg in enumerate(self.diagonals):
            idx = np.arange(self.n - r)
            a[idx, idx + r] = seg
            a[idx + r, idx] = seg
        return a

    def trace(self) -> float:
        return float(self.diagonals[0].sum())

    def frobenius_sq(self) -> float:
        total = float(np.dot(self.diagonals[0], self.diagonals[0]))
        for seg in self.diagonals[1:]:
            total += 2.0 * float(np.dot(seg, seg))
        return total


def generate_field(config: EnsembleConfig, replica: int = 0) -> RandomField:
    """Generate the random field for one replica, diagonal by diagonal."""
    n = config.n
    process = config.process
    diags = []
    for r in range(n):
        rng = substream(config.seed, replica, r)
        m = n - r
        if isinstance(process, IID):
            seg = standard_normals(rng, m)
        elif isinstance(process, GaussAR1):
            seg = generate_ar1_diagonal(m, process.rho, rng)
        elif isinstance(process, FiniteMarkov):
            seg = generate_markov_diagonal(m, process.chain, rng)
        elif isinstance(process, ConstantDiagonal):
            seg = np.full(m, standard_normals(rng, 1)[0])
        else:
            raise ConfigurationError(f"unknown process {process!r}")
        diags.append(seg)
    return RandomField(n=n, diagonals=tuple(diags))


def assemble_matrix(field: RandomField) -> SymmetricMatrix:
    scale = math.sqrt(field.n)
    return SymmetricMatrix(
        n=field.n, diagonals=tuple(seg / scale for seg in field.diagonals)
    )


def sample_matrix(config: EnsembleConfig, replica: int = 0) -> SymmetricMatrix:
    return assemble_matrix(generate_field(config, replica))


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    details: dict


@dataclass(frozen=True)
class ConditionReport:
    config: dict
    replicas: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "replicas": self.replicas,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "details": c.details}
                for c in self.checks
            ],
        }


def check_conditions(config: EnsembleConfig, replicas: int) -> ConditionReport:
    """Monte Carlo check of the entry-moment normalization plus the analytic
    covariance summability of the configured process.

    Replica-level averages give independent samples, so standard errors are
    computed across replicas.  Within 4 standard errors counts as passing.
    """
    if replicas < 100:
        raise ConfigurationError(f"need at least 100 replicas, got {replicas}")
    max_order = 8
    rep_means = np.empty(replicas)
    rep_abs_moments = np.empty((replicas, max_order))
    for j in range(replicas):
        entries = generate_field(config, replica=j).all_entries()
        rep_means[j] = entries.mean()
        abs_entries = np.abs(entries)
        for k in range(1, max_order + 1):
            rep_abs_moments[j, k - 1] = np.mean(abs_entries**k)

    def se(values: np.ndarray) -> float:
        return float(values.std(ddof=1) / math.sqrt(len(values)))

    mean_est = float(rep_means.mean())
    mean_se = se(rep_means)
    var_est = float(rep_abs_moments[:, 1].mean())
    var_se = se(rep_abs_moments[:, 1])
    moment_rows = {
        str(k): {
            "estimate": float(rep_abs_moments[:, k - 1].mean()),
            "std_error": se(rep_abs_moments[:, k - 1]),
        }
        for k in range(1, max_order + 1)
    }
    c1_pass = abs(mean_est) <= 4.0 * mean_se and abs(var_est - 1.0) <= 4.0 * var_se
    c1 = ConditionCheck(
        name="entry_moments",
        passed=c1_pass,
        details={
            "mean": mean_est,
            "mean_std_error": mean_se,
            "second_moment": var_est,
            "second_moment_std_error": var_se,
            "abs_moments": moment_rows,
        },
    )

    model = covariance_model(config.process)
    c4 = ConditionCheck(
        name="covariance_summability",
        passed=model.summable,
        details={"summable": model.summable, "abs_sum": model.abs_sum},
    )
    return ConditionReport(config=config.to_dict(), replicas=replicas, checks=(c1, c4))
