"""Energy-divergence change-point detection with an asymptotic test."""

from .energy import (DivergenceScan, KernelCapError, KernelConfig, KernelMatrix,
                     divergence_at, divergence_from_signal, pairwise_kernel, scan)
from .limit import SimConfig, LimitSample, asymptotic_test, p_value, simulate_sup
from .permutation import permutation_test
from .report import TestReport, read_report, write_report
from .signal import GeneratorSpec, Signal, SignalError, generate, load_signal, save_signal
from .spectrum import CenteredGram, Spectrum, center_gram, top_eigenvalues

__all__ = [
    "CenteredGram", "DivergenceScan", "GeneratorSpec", "KernelCapError", "KernelConfig",
    "KernelMatrix", "LimitSample", "Signal", "SignalError", "SimConfig", "Spectrum",
    "TestReport", "asymptotic_test", "center_gram", "divergence_at", "divergence_from_signal",
    "generate", "load_signal", "p_value", "pairwise_kernel", "permutation_test",
    "read_report", "save_signal", "scan", "simulate_sup", "top_eigenvalues", "write_report",
]
