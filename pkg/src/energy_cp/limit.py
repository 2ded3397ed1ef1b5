"""Monte Carlo reference distribution of sup |Y(t)| and the asymptotic test.

The limit process is ``Y(t) = sum_i lambda_i (t(1-t) - B_i(t)^2)`` with
independent standard Brownian bridges ``B_i``, truncated to the supplied
eigenvalues and evaluated on the interior grid ``t_j = j/T``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .energy import DEFAULT_MAX_N, KernelConfig, pairwise_kernel, scan
from .report import TestReport
from .signal import Signal
from .spectrum import DEFAULT_EIGENVALUES, Spectrum, center_gram, top_eigenvalues

DEFAULT_GRID = 1000
DEFAULT_REPLICATES = 499
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class SimConfig:
    grid_points: int = DEFAULT_GRID
    replicates: int = DEFAULT_REPLICATES
    seed: int = 0

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValueError(f"grid_points must be >= 2, got {self.grid_points}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class LimitSample:
    sup_values: np.ndarray
    config: SimConfig
    spectrum: Spectrum


def replicate_rng(seed: int, r: int) -> np.random.Generator:
    """Independent stream for replicate ``r``, fixed by (seed, r) alone."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))


def bridge_paths(rng: np.random.Generator, m: int, T: int) -> np.ndarray:
    """``m`` Brownian bridges at t = 1/T, ..., (T-1)/T as an (m, T-1) array.

    Built from the Wiener path of N(0, 1/T) increments, tied down with
    ``B(t) = W(t) - t W(1)``.
    """
    W = np.cumsum(rng.standard_normal((m, T)), axis=1)
    W *= 1.0 / math.sqrt(T)
    t = np.arange(1, T) / T
    return W[:, :-1] - t * W[:, -1:]


def simulate_process(eigenvalues, rng: np.random.Generator, T: int) -> np.ndarray:
    """One path of the truncated limit process on the interior grid."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    B = bridge_paths(rng, lam.shape[0], T)
    t = np.arange(1, T) / T
    return lam.sum() * (t * (1.0 - t)) - lam @ np.square(B)


@njit(cache=True, nogil=True)
def _sup_abs_process(lam, Z):
    """sup_j |Y(t_j)| for bridges built from the (m, T) normal draws ``Z``.

    Fused equivalent of :func:`simulate_process`: the Wiener path is
    accumulated in the same order as ``np.cumsum``.
    """
    m, T = Z.shape
    scale = 1.0 / np.sqrt(T)
    y = np.zeros(T - 1)
    lam_sum = 0.0
    for i in range(m):
        lam_sum += lam[i]
    for j in range(T - 1):
        t = (j + 1) / T
        y[j] = lam_sum * (t * (1.0 - t))
    for i in range(m):
        w = 0.0
        for j in range(T):
            w += Z[i, j]
        w1 = w * scale
        w = 0.0
        for j in range(T - 1):
            w += Z[i, j]
            b = w * scale - ((j + 1) / T) * w1
            y[j] -= lam[i] * (b * b)
    best = 0.0
    for j in range(T - 1):
        a = abs(y[j])
        if a > best:
            best = a
    return best


def simulate_sup(spectrum: Spectrum, config: SimConfig = SimConfig()) -> LimitSample:
    """Draw ``config.replicates`` suprema of |Y(t)| over the grid.

    Replicate r uses its own stream derived from ``(config.seed, r)``, so
    any subset of replicates can be recomputed independently.
    """
    if spectrum.m < 1:
        raise ValueError("spectrum must contain at least one eigenvalue")
    lam = np.ascontiguousarray(spectrum.eigenvalues, dtype=np.float64)
    T = config.grid_points
    sups = np.empty(config.replicates)
    for r in range(config.replicates):
        Z = replicate_rng(config.seed, r).standard_normal((lam.shape[0], T))
        sups[r] = _sup_abs_process(lam, Z)
    return LimitSample(sup_values=sups, config=config, spectrum=spectrum)


def p_value(sup_values, t_star: float) -> float:
    """Fraction of reference suprema at or above ``t_star``.

    A zero statistic returns 1.0 outright, so degenerate (constant) input
    never rejects.
    """
    if isinstance(sup_values, LimitSample):
        sup_values = sup_values.sup_values
    sups = np.asarray(sup_values, dtype=np.float64)
    if sups.size == 0:
        raise ValueError("empty reference sample")
    if not math.isfinite(t_star) or t_star < 0:
        raise ValueError(f"t_star must be finite and non-negative, got {t_star}")
    if t_star == 0:
        return 1.0
    return float(np.count_nonzero(sups >= t_star)) / sups.size


def statistic_p_value(sup_values, t_star: float) -> float:
    # A negative maximum lies below every supremum; same count as t* = 0.
    return p_value(sup_values, max(t_star, 0.0))


def _millis(start):
    return (time.perf_counter() - start) * 1000.0


def asymptotic_test(signal: Signal, kernel_config: KernelConfig = KernelConfig(),
                    m: int = DEFAULT_EIGENVALUES, sim_config: SimConfig = SimConfig(),
                    alpha: float = DEFAULT_ALPHA, max_n: int | None = DEFAULT_MAX_N,
                    eigen_method: str = "auto", keep_sample: bool = False) -> TestReport:
    """Detect and test a single change-point against the simulated limit law.

    Parameters
    ----------
    signal : Signal
        At least four observations.
    kernel_config : KernelConfig
    m : int
        Eigenvalues kept; clipped to n.
    sim_config : SimConfig
    alpha : float
        Level in (0, 1); the report rejects when ``p_value <= alpha``.
    max_n : int or None
        Kernel materialization cap.
    keep_sample : bool
        Attach the eigenvalues and simulated suprema to the report.
    """
    if signal.n < 4:
        raise ValueError(f"the test needs at least 4 observations, got {signal.n}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    m = min(m, signal.n)
    timings = {}

    start = time.perf_counter()
    kernel = pairwise_kernel(signal, kernel_config, max_n=max_n)
    divergence = scan(kernel)
    timings["scan"] = _millis(start)

    start = time.perf_counter()
    gram = center_gram(kernel)
    del kernel
    spectrum = top_eigenvalues(gram, m, method=eigen_method)
    del gram
    timings["spectrum"] = _millis(start)

    start = time.perf_counter()
    sample = simulate_sup(spectrum, sim_config)
    pv = statistic_p_value(sample.sup_values, divergence.t_star)
    timings["simulation"] = _millis(start)
    timings["total"] = timings["scan"] + timings["spectrum"] + timings["simulation"]

    return TestReport(
        method="asymptotic", n=signal.n, d=signal.d, beta=kernel_config.beta, alpha=alpha,
        k_star=divergence.k_star, t_star=divergence.t_star, p_value=pv, reject=pv <= alpha,
        eigenvalues_used=m, replicates=sim_config.replicates,
        grid_points=sim_config.grid_points, seed=sim_config.seed, elapsed_millis=timings,
        eigenvalues=spectrum.eigenvalues if keep_sample else None,
        sup_values=sample.sup_values if keep_sample else None,
    )
