"""Centered kernel matrix and its largest-magnitude eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .energy import KernelMatrix

DEFAULT_EIGENVALUES = 50
DEFAULT_TOL = 1e-10
#: Matrices up to this size are diagonalized densely.
DENSE_MAX_N = 1000


class EigenConvergenceError(RuntimeError):
    """The iterative eigensolver ran out of iterations."""


@dataclass(frozen=True, eq=False)
class CenteredGram:
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues ordered by decreasing magnitude, with per-pair residuals."""

    eigenvalues: np.ndarray
    residuals: np.ndarray

    @property
    def m(self) -> int:
        return len(self.eigenvalues)


def center_gram(kernel: KernelMatrix) -> CenteredGram:
    """Center the kernel matrix with off-diagonal row means and pair mean.

    Entry (i, j) is ``(K[i, j] - mu[i] - mu[j] + eta) / n`` where ``mu[i]``
    averages row i without its diagonal entry and ``eta`` averages the
    strict upper triangle. The diagonal of the result is kept.
    """
    K = kernel.values
    n = kernel.n
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    row_sums = K.sum(axis=1)
    mu = row_sums / (n - 1)
    eta = row_sums.sum() / (n * (n - 1.0))
    G = K - mu[:, None]
    G -= mu[None, :]
    G += eta
    G /= n
    # Remove the rounding asymmetry left by the two broadcasts.
    G += G.T
    G *= 0.5
    return CenteredGram(G)


def _order(values):
    # Descending |value|, ties broken by descending signed value.
    return np.lexsort((-values, -np.abs(values)))


def _dense_top(A, m):
    n = A.shape[0]
    if 2 * m > n:
        w, V = scipy.linalg.eigh(A)
    else:
        # Largest magnitudes sit at the two ends of the ordered spectrum.
        w_lo, V_lo = scipy.linalg.eigh(A, subset_by_index=[0, m - 1])
        w_hi, V_hi = scipy.linalg.eigh(A, subset_by_index=[n - m, n - 1])
        w = np.concatenate([w_lo, w_hi])
        V = np.concatenate([V_lo, V_hi], axis=1)
    order = _order(w)[:m]
    w, V = w[order], V[:, order]
    resid = np.linalg.norm(A @ V - V * w, axis=0)
    return w, resid


def lanczos_top(A, m, tol=DEFAULT_TOL, max_iter=None, seed=0):
    """Largest-magnitude eigenvalues of symmetric ``A`` by Lanczos.

    Full (twice-applied) Gram-Schmidt reorthogonalization keeps the Krylov
    basis orthonormal. When the recurrence breaks down on an invariant
    subspace the basis is extended with a fresh random direction, so
    repeated eigenvalues are recovered. Convergence is declared when every
    wanted Ritz pair has residual ``|beta_j * s_ji| <= tol * ||T||``.

    Returns
    -------
    eigenvalues, residuals : ndarray
    """
    n = A.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    if max_iter is None:
        max_iter = 30 * m
    steps = min(n, max(max_iter, m))
    rng = np.random.default_rng(seed)
    Q = np.zeros((n, steps))
    alpha = np.zeros(steps)
    beta = np.zeros(steps)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    scale = 0.0
    check_every = max(1, m // 4)
    for j in range(steps):
        Q[:, j] = q
        w = A @ q
        alpha[j] = q @ w
        w -= alpha[j] * q
        if j > 0:
            w -= beta[j - 1] * Q[:, j - 1]
        basis = Q[:, :j + 1]
        w -= basis @ (basis.T @ w)
        w -= basis @ (basis.T @ w)
        b = np.linalg.norm(w)
        scale = max(scale, abs(alpha[j]) + b + (beta[j - 1] if j > 0 else 0.0))
        breakdown = b <= 1e-13 * max(scale, 1e-300)
        last = j + 1 == steps
        if breakdown or last or (j + 1 >= m and (j + 1 - m) % check_every == 0):
            theta, S = scipy.linalg.eigh_tridiagonal(alpha[:j + 1], beta[:j])
            resid = np.abs((0.0 if breakdown else b) * S[-1, :])
            order = _order(theta)
            if j + 1 >= m:
                top = order[:m]
                if np.all(resid[top] <= tol * max(scale, 1e-300)) or j + 1 == n:
                    return theta[top], resid[top]
            if last:
                raise EigenConvergenceError(
                    f"Lanczos did not converge to {m} eigenvalues within {steps} iterations"
                )
        if breakdown:
            # Restart in the orthogonal complement; T becomes block diagonal.
            w = rng.standard_normal(n)
            w -= basis @ (basis.T @ w)
            w -= basis @ (basis.T @ w)
            b_new = np.linalg.norm(w)
            beta[j] = 0.0
            q = w / b_new
        else:
            beta[j] = b
            q = w / b
    raise EigenConvergenceError("Lanczos iteration exhausted")  # pragma: no cover


def top_eigenvalues(gram: CenteredGram, m: int = DEFAULT_EIGENVALUES,
                    method: str = "auto", tol: float = DEFAULT_TOL) -> Spectrum:
    """The ``m`` eigenvalues of largest absolute value.

    Parameters
    ----------
    gram : CenteredGram
    m : int
        Number of eigenvalues, ``1 <= m <= n``.
    method : {"auto", "dense", "lanczos"}
        ``auto`` uses the dense solver for n <= DENSE_MAX_N.
    tol : float
        Lanczos residual tolerance relative to the matrix norm estimate.
    """
    A = gram.values
    n = gram.n
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    if method == "auto":
        method = "dense" if n <= DENSE_MAX_N else "lanczos"
    if method == "dense":
        w, resid = _dense_top(A, m)
    elif method == "lanczos":
        w, resid = lanczos_top(A, m, tol=tol)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return Spectrum(eigenvalues=np.asarray(w, dtype=np.float64),
                    residuals=np.asarray(resid, dtype=np.float64))
