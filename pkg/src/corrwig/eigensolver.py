"""Dense symmetric eigenvalue solver.

Two stages, both implemented here rather than delegated:

1. Householder reduction to tridiagonal form.  Reflections are applied in
   panels: within a panel each column is corrected against the pending
   rank-2 updates, and the trailing block is updated once per panel with a
   pair of matrix products.  This is algebraically the classic one-column
   reduction, reorganized so the heavy work runs through BLAS-3.

2. Implicitly shifted QL iteration with Wilkinson shifts on the
   tridiagonal, deflating an off-diagonal e[m] once
   |e[m]| <= rel_tol * (|d[m]| + |d[m+1]|).

Eigenvalues only; eigenvectors are not accumulated.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError

DEFLATION_RTOL = 1e-14
_PANEL = 48


def _householder_vector(x: np.ndarray):
    """Reflection data (beta, tau, v) with v[0] = 1 and H x = beta * e1."""
    alpha = float(x[0])
    tail = x[1:]
    sigma = float(tail @ tail)
    if sigma == 0.0:
        return alpha, 0.0, None
    norm_x = math.sqrt(alpha * alpha + sigma)
    beta = -math.copysign(norm_x, alpha)
    v = np.empty(x.size)
    v[0] = 1.0
    v[1:] = tail / (alpha - beta)
    tau = (beta - alpha) / beta
    return beta, tau, v


def tridiagonalize(a: np.ndarray, panel: int = _PANEL):
    """Reduce a symmetric matrix to tridiagonal form; returns (d, e)."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    if n == 1:
        d[0] = a[0, 0]
        return d, e
    u_panel = np.zeros((n, panel))
    w_panel = np.zeros((n, panel))
    start = 0
    while start < n:
        stop = min(start + panel, n)
        u_panel[:] = 0.0
        w_panel[:] = 0.0
        for i in range(start, stop):
            j = i - start
            col = a[i:, i].copy()
            if j > 0:
                col -= u_panel[i:, :j] @ w_panel[i, :j]
                col -= w_panel[i:, :j] @ u_panel[i, :j]
            d[i] = col[0]
            if i == n - 1:
                continue
            beta, tau, v = _householder_vector(col[1:])
            e[i] = beta
            if tau == 0.0:
                continue
            u_panel[i + 1 :, j] = v
            p = a[i + 1 :, i + 1 :] @ v
            if j > 0:
                uu = u_panel[i + 1 :, :j]
                ww = w_panel[i + 1 :, :j]
                p -= uu @ (ww.T @ v)
                p -= ww @ (uu.T @ v)
            p *= tau
            p -= (0.5 * tau * (p @ v)) * v
            w_panel[i + 1 :, j] = p
        if stop < n:
            trailing = a[stop:, stop:]
            trailing -= u_panel[stop:] @ w_panel[stop:].T
            trailing -= w_panel[stop:] @ u_panel[stop:].T
        start = stop
    return d, e


def tridiagonal_eigenvalues(
    d: np.ndarray, e: np.ndarray, rel_tol: float = DEFLATION_RTOL
) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix, sorted ascending.

    Raises NumericalError if convergence takes more than 30*n QL sweeps
    in total.
    """
    n = len(d)
    if n == 0:
        return np.empty(0)
    if n == 1:
        return np.array([float(d[0])])
    if len(e) != n - 1:
        raise NumericalError(f"off-diagonal length {len(e)} does not match n={n}")
    d = list(map(float, d))
    e = list(map(float, e)) + [0.0]
    sweeps = 0
    budget = 30 * n
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                scale = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= rel_tol * scale:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > budget:
                raise NumericalError(
                    f"QL iteration exceeded {budget} sweeps at eigenvalue {l}"
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    out = np.array(d)
    out.sort()
    return out


def symmetric_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues of a dense symmetric matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericalError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a), initial=0.0))
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        raise NumericalError("matrix is not symmetric")
    d, e = tridiagonalize(a)
    return tridiagonal_eigenvalues(d, e)
