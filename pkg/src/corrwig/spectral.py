"""Spectra, empirical distributions, and the semicircle reference law."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .eigensolver import symmetric_eigenvalues
from .ensemble import SymmetricMatrix
from .errors import ConfigurationError, NumericalError


def catalan(m: int) -> int:
    """Exact m-th Catalan number (2m)! / (m! (m+1)!)."""
    if m < 0:
        raise ConfigurationError(f"m must be nonnegative, got {m}")
    return math.comb(2 * m, m) // (m + 1)


def semicircle_density(x) -> Union[float, np.ndarray]:
    """Density (1/2pi) sqrt(4 - x^2) on [-2, 2], zero outside."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= 2.0
    out = np.zeros_like(x)
    out[inside] = np.sqrt(4.0 - x[inside] ** 2) / (2.0 * np.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(x) -> Union[float, np.ndarray]:
    """Distribution function of the semicircle law (closed form)."""
    x = np.asarray(x, dtype=float)
    clipped = np.clip(x, -2.0, 2.0)
    out = (
        0.5
        + clipped * np.sqrt(4.0 - clipped**2) / (4.0 * np.pi)
        + np.arcsin(clipped / 2.0) / np.pi
    )
    out = np.where(x <= -2.0, 0.0, np.where(x >= 2.0, 1.0, out))
    return out if out.ndim else float(out)


def semicircle_moment(k: int) -> int:
    """k-th moment of the semicircle law: 0 for odd k, else Catalan(k/2)."""
    if k < 0:
        raise ConfigurationError(f"k must be nonnegative, got {k}")
    if k % 2 == 1:
        return 0
    return catalan(k // 2)


class SemicircleLaw:
    """The fixed standard semicircle law on [-2, 2]."""

    support = (-2.0, 2.0)

    def density(self, x):
        return semicircle_density(x)

    def cdf(self, x):
        return semicircle_cdf(x)

    def moment(self, k: int) -> int:
        return semicircle_moment(k)


SEMICIRCLE = SemicircleLaw()


@dataclass(frozen=True)
class Spectrum:
    n: int
    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size != self.n:
            raise ConfigurationError(f"expected {self.n} eigenvalues, got shape {lam.shape}")
        if np.any(np.diff(lam) < 0.0):
            raise ConfigurationError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", lam)


def eigenvalues(matrix: SymmetricMatrix) -> Spectrum:
    """All eigenvalues of the scaled matrix, with a trace consistency check."""
    lam = symmetric_eigenvalues(matrix.dense())
    trace = matrix.trace()
    scale = float(np.max(np.abs(lam), initial=0.0))
    tol = matrix.n * 1e-9 * max(scale, 1e-30)
    if abs(float(lam.sum()) - trace) > tol:
        raise NumericalError(
            f"eigenvalue sum {lam.sum():.6e} disagrees with trace {trace:.6e}"
        )
    return Spectrum(n=matrix.n, eigenvalues=lam)


def trace_moment(spectrum: Spectrum, k: int) -> float:
    """Normalized power sum (1/n) sum_i lambda_i^k, equal to (1/n) tr(X^k)."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    return float(np.mean(spectrum.eigenvalues**k))


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample with ECDF, histogram, and raw-moment views."""

    values: np.ndarray
    bin_edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray

    def ecdf(self, x) -> Union[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        out = np.searchsorted(self.values, x, side="right") / self.values.size
        return out if out.ndim else float(out)

    def moment(self, k: int) -> float:
        if k < 0:
            raise ConfigurationError(f"k must be nonnegative, got {k}")
        return float(np.mean(self.values**k))

    @classmethod
    def from_values(cls, values, bins="auto") -> "EmpiricalDistribution":
        v = np.sort(np.asarray(values, dtype=float))
        if v.size == 0:
            raise ConfigurationError("empty sample")
        lo, hi = float(v[0]), float(v[-1])
        if lo == hi:
            edges = np.array([lo - 0.5, lo + 0.5])
            return cls(values=v, bin_edges=edges, densities=np.array([1.0]),
                       counts=np.array([v.size]))
        if bins == "auto":
            nbins = _freedman_diaconis_bins(v)
        else:
            nbins = int(bins)
            if nbins < 1:
                raise ConfigurationError(f"bin count must be >= 1, got {bins}")
        counts, edges = np.histogram(v, bins=nbins, range=(lo, hi))
        widths = np.diff(edges)
        densities = counts / (v.size * widths)
        return cls(values=v, bin_edges=edges, densities=densities, counts=counts)


def _freedman_diaconis_bins(sorted_values: np.ndarray) -> int:
    q75, q25 = np.percentile(sorted_values, [75.0, 25.0])
    width = 2.0 * (q75 - q25) / sorted_values.size ** (1.0 / 3.0)
    span = float(sorted_values[-1] - sorted_values[0])
    if width <= 0.0 or span / width > sorted_values.size:
        # degenerate spread; one bin per point is the finest useful view
        return int(sorted_values.size)
    return max(1, int(math.ceil(span / width)))


def empirical_distribution(spectrum: Spectrum, bins="auto") -> EmpiricalDistribution:
    return EmpiricalDistribution.from_values(spectrum.eigenvalues, bins=bins)


def kolmogorov_distance(
    empirical: EmpiricalDistribution, law: SemicircleLaw = SEMICIRCLE
) -> float:
    """sup_x |ECDF(x) - F(x)|, maximized over both one-sided ECDF limits at
    every jump point."""
    v = empirical.values
    n = v.size
    cdf = np.asarray(law.cdf(v), dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


@dataclass(frozen=True)
class MomentReport:
    orders: tuple
    empirical: tuple
    limit: tuple
    abs_error: tuple

    def rows(self):
        return list(zip(self.orders, self.empirical, self.limit, self.abs_error))


def moment_report(spectrum: Spectrum, max_k: int) -> MomentReport:
    """Empirical trace moments vs the semicircle limit moments, k = 1..max_k."""
    if max_k < 1:
        raise ConfigurationError(f"max_k must be >= 1, got {max_k}")
    orders = tuple(range(1, max_k + 1))
    empirical = tuple(trace_moment(spectrum, k) for k in orders)
    limit = tuple(float(semicircle_moment(k)) for k in orders)
    abs_error = tuple(abs(e - l) for e, l in zip(empirical, limit))
    return MomentReport(orders=orders, empirical=empirical, limit=limit, abs_error=abs_error)
