"""Pairwise beta-kernel, empirical energy divergence and the split scan."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist, pdist, squareform

from .signal import Signal

#: Largest n for which the full n x n kernel is materialized by default.
DEFAULT_MAX_N = 15000


class KernelCapError(ValueError):
    """The signal is too long to materialize its kernel matrix."""


@dataclass(frozen=True)
class KernelConfig:
    beta: float = 1.0

    def __post_init__(self):
        if not 0 < self.beta < 2:
            raise ValueError(f"beta must lie in (0, 2), got {self.beta}")


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Symmetric n x n matrix of |x_i - x_j|^beta with zero diagonal."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_kernel(signal: Signal, config: KernelConfig = KernelConfig(),
                    max_n: int | None = DEFAULT_MAX_N) -> KernelMatrix:
    """Materialize the matrix of Euclidean distances raised to ``beta``.

    Parameters
    ----------
    signal : Signal
        At least two observations.
    config : KernelConfig
    max_n : int or None
        Refuse signals longer than this (``None`` disables the cap).

    Raises
    ------
    ValueError
        If ``signal.n < 2``.
    KernelCapError
        If ``signal.n > max_n``.
    """
    n = signal.n
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    if max_n is not None and n > max_n:
        raise KernelCapError(
            f"n={n} exceeds the kernel size cap of {max_n}; use the long-signal "
            "method or raise the cap explicitly"
        )
    # pdist evaluates each unordered pair once, so the result is exactly
    # symmetric with an exact zero diagonal.
    dist = pdist(signal.data, metric="euclidean")
    if config.beta != 1.0:
        np.power(dist, config.beta, out=dist)
    return KernelMatrix(squareform(dist, checks=False))


def _check_split(n, k):
    if not 2 <= k <= n - 2:
        raise ValueError(f"split index k={k} outside [2, {n - 2}] for n={n}")


def divergence_at(kernel: KernelMatrix, k: int) -> float:
    """Empirical energy divergence between the first k and last n-k points.

    Direct O(n^2) summation; used as the reference for :func:`scan`.
    """
    K = kernel.values
    n = kernel.n
    _check_split(n, k)
    between = K[:k, k:].sum()
    within_left = np.triu(K[:k, :k], 1).sum()
    within_right = np.triu(K[k:, k:], 1).sum()
    m = n - k
    return float(2.0 * between / (k * m)
                 - within_left / (k * (k - 1) / 2.0)
                 - within_right / (m * (m - 1) / 2.0))


def divergence_from_signal(signal: Signal, k: int, config: KernelConfig = KernelConfig(),
                           block: int = 2048) -> float:
    """Same value as :func:`divergence_at` without materializing the kernel.

    Pair sums are accumulated block by block, so memory is O(block * n).
    """
    n = signal.n
    _check_split(n, k)
    X = signal.data
    beta = config.beta

    def cross_sum(A, B):
        total = 0.0
        for start in range(0, A.shape[0], block):
            d = _distances(A[start:start + block], B)
            if beta != 1.0:
                np.power(d, beta, out=d)
            total += d.sum()
        return total

    left, right = X[:k], X[k:]
    m = n - k
    between = cross_sum(left, right)
    within_left = cross_sum(left, left) / 2.0
    within_right = cross_sum(right, right) / 2.0
    return float(2.0 * between / (k * m)
                 - within_left / (k * (k - 1) / 2.0)
                 - within_right / (m * (m - 1) / 2.0))


def _distances(A, B):
    if A.shape[1] == 1:
        return np.abs(A[:, :1] - B[:, 0][None, :])
    return cdist(A, B)


def normalization(n: int, k):
    """Factor k^2 (n-k)^2 / (n^2 (n-1)) turning a divergence into Q(k)."""
    k = np.asarray(k, dtype=np.float64)
    return k * k * (n - k) ** 2 / (float(n) * n * (n - 1))


@njit(cache=True, nogil=True)
def _split_sums(K, perm):
    """Between, within-left and within-right pair sums for every split.

    ``perm`` maps signal position to kernel row. Index s of each output
    holds the sums for a left block of size s (s = 0..n). Moving the point
    at position s into the left block shifts its partial row sums from
    the right-hand totals to the left-hand ones.
    """
    n = perm.shape[0]
    left_part = np.zeros(n)
    right_part = np.zeros(n)
    for pos in range(n):
        row = K[perm[pos]]
        acc = 0.0
        for i in range(pos):
            acc += row[perm[i]]
        left_part[pos] = acc
        acc = 0.0
        for j in range(pos + 1, n):
            acc += row[perm[j]]
        right_part[pos] = acc

    within_left = np.zeros(n + 1)
    between = np.zeros(n + 1)
    for s in range(n):
        within_left[s + 1] = within_left[s] + left_part[s]
        between[s + 1] = between[s] + right_part[s] - left_part[s]
    within_right = np.zeros(n + 1)
    for s in range(n - 1, -1, -1):
        within_right[s] = within_right[s + 1] + right_part[s]
    return between, within_left, within_right


@njit(cache=True, nogil=True)
def _normalized_from_sums(n, between, within_left, within_right):
    raw = np.empty(n - 3)
    normed = np.empty(n - 3)
    for idx in range(n - 3):
        k = idx + 2
        m = n - k
        value = (2.0 * between[k] / (k * m)
                 - within_left[k] / (k * (k - 1) / 2.0)
                 - within_right[k] / (m * (m - 1) / 2.0))
        raw[idx] = value
        normed[idx] = value * (k * k * (m * m / (n * (n * (n - 1.0)))))
    return raw, normed


@njit(cache=True, nogil=True)
def max_normalized(K, perm):
    """Largest normalized statistic over splits of the signal reordered by ``perm``."""
    n = perm.shape[0]
    between, within_left, within_right = _split_sums(K, perm)
    _, normed = _normalized_from_sums(n, between, within_left, within_right)
    return normed.max()


@dataclass(frozen=True, eq=False)
class DivergenceScan:
    """Raw and normalized divergence for every admissible split k in [2, n-2]."""

    n: int
    raw: np.ndarray
    normalized: np.ndarray
    k_star: int
    t_star: float

    @property
    def splits(self) -> np.ndarray:
        return np.arange(2, self.n - 1)

    def raw_at(self, k: int) -> float:
        _check_split(self.n, k)
        return float(self.raw[k - 2])

    def normalized_at(self, k: int) -> float:
        _check_split(self.n, k)
        return float(self.normalized[k - 2])


def scan(kernel: KernelMatrix) -> DivergenceScan:
    """Evaluate every split in O(n^2) total and locate the maximizer.

    Ties in the normalized statistic resolve to the smallest k.
    """
    n = kernel.n
    if n < 4:
        raise ValueError(f"scan needs at least 4 observations, got {n}")
    K = np.ascontiguousarray(kernel.values, dtype=np.float64)
    perm = np.arange(n, dtype=np.int64)
    between, within_left, within_right = _split_sums(K, perm)
    raw, normed = _normalized_from_sums(n, between, within_left, within_right)
    idx = int(np.argmax(normed))
    return DivergenceScan(n=n, raw=raw, normalized=normed, k_star=idx + 2,
                          t_star=float(normed[idx]))
