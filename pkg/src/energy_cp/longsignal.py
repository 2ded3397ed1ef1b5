"""Subsample-and-refine detection for signals too long for a full kernel."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .energy import KernelConfig, pairwise_kernel, scan
from .limit import DEFAULT_ALPHA, SimConfig, asymptotic_test
from .report import TestReport
from .signal import Signal
from .spectrum import DEFAULT_EIGENVALUES

DEFAULT_TARGET_LENGTH = 2000
MAX_HALF_WIDTH = 1000


@dataclass(frozen=True, eq=False)
class SubsamplePlan:
    """Equidistant sub-signal positions (1-based) and their spacing."""

    indices: np.ndarray
    stride: float
    target_length: int

    @property
    def half_width(self) -> int:
        """Refinement half-width, ``ceil(min(2 * stride, 1000))``."""
        return int(math.ceil(min(2.0 * self.stride, MAX_HALF_WIDTH)))


@dataclass(frozen=True, eq=False)
class LongSignalResult:
    """Coarse test on the sub-signal plus, after a rejection, the refined split.

    ``refined_k`` and ``window`` are in original 1-based coordinates and are
    ``None`` when the coarse test finds no change-point.
    """

    n: int
    coarse_report: TestReport
    plan: SubsamplePlan
    refined_k: int | None = None
    window: tuple[int, int] | None = None
    elapsed_millis: dict | None = None

    @property
    def half_width(self) -> int:
        return self.plan.half_width

    @property
    def coarse_k(self) -> int:
        """Coarse split mapped back to original coordinates."""
        return int(self.plan.indices[self.coarse_report.k_star - 1])

    @property
    def location(self) -> int:
        """Refined split if a change was found, else the mapped coarse split."""
        return self.refined_k if self.refined_k is not None else self.coarse_k

    def to_report(self) -> TestReport:
        """Flatten into a ``method="long"`` report in original coordinates."""
        return replace(self.coarse_report, method="long", n=self.n, k_star=self.location,
                       refined_window=self.window,
                       elapsed_millis=dict(self.elapsed_millis or {}))


def subsample(n: int, target_length: int = DEFAULT_TARGET_LENGTH) -> SubsamplePlan:
    """Pick ``min(n, target_length)`` equidistant positions starting at 1."""
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    if target_length < 4:
        raise ValueError(f"target_length must be >= 4, got {target_length}")
    if n <= target_length:
        return SubsamplePlan(np.arange(1, n + 1, dtype=np.int64), 1.0, target_length)
    j = np.arange(target_length, dtype=np.int64)
    indices = (j * n) // target_length + 1
    return SubsamplePlan(indices, n / target_length, target_length)


def refinement_window(k_prime: int, half_width: int, n: int) -> tuple[int, int]:
    """Clip ``[k' - z, k' + z]`` to ``[1, n]``, widened to at least 4 points."""
    lo = max(1, k_prime - half_width)
    hi = min(n, k_prime + half_width)
    while hi - lo + 1 < 4:
        if lo > 1:
            lo -= 1
        if hi - lo + 1 < 4 and hi < n:
            hi += 1
    return lo, hi


def detect_long(signal: Signal, kernel_config: KernelConfig = KernelConfig(),
                m: int = DEFAULT_EIGENVALUES, sim_config: SimConfig = SimConfig(),
                alpha: float = DEFAULT_ALPHA,
                target_length: int = DEFAULT_TARGET_LENGTH,
                keep_sample: bool = False) -> LongSignalResult:
    """Test on an equidistant sub-signal, then re-scan a window around the hit.

    The refinement is a scan only; the reported p-value is the coarse
    test's. When the signal is no longer than ``target_length`` the plan is
    the identity and the coarse split is returned unchanged.
    """
    n = signal.n
    plan = subsample(n, target_length)
    timings = {}

    start = time.perf_counter()
    if plan.stride == 1.0:
        sub = signal
    else:
        sub = Signal(signal.data[plan.indices - 1])
    timings["subsample"] = (time.perf_counter() - start) * 1000.0

    coarse = asymptotic_test(sub, kernel_config, m, sim_config, alpha,
                             keep_sample=keep_sample)
    for phase, ms in coarse.elapsed_millis.items():
        if phase != "total":
            timings[phase] = ms

    if not coarse.reject:
        timings["total"] = sum(timings.values())
        return LongSignalResult(n=n, coarse_report=coarse, plan=plan, elapsed_millis=timings)

    start = time.perf_counter()
    k_prime = int(plan.indices[coarse.k_star - 1])
    lo, hi = refinement_window(k_prime, plan.half_width, n)
    if plan.stride == 1.0:
        refined = coarse.k_star
    else:
        local = scan(pairwise_kernel(signal[lo - 1:hi], kernel_config, max_n=None))
        refined = lo - 1 + local.k_star
    timings["refine"] = (time.perf_counter() - start) * 1000.0
    timings["total"] = sum(timings.values())
    return LongSignalResult(n=n, coarse_report=coarse, plan=plan, refined_k=refined,
                            window=(lo, hi), elapsed_millis=timings)
