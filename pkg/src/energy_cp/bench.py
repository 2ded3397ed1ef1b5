"""Experiment harness: rejection rates and location errors over seeded trials."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .energy import KernelConfig
from .limit import DEFAULT_ALPHA, DEFAULT_GRID, DEFAULT_REPLICATES, SimConfig, asymptotic_test
from .longsignal import DEFAULT_TARGET_LENGTH, detect_long
from .permutation import permutation_test
from .signal import KINDS, GeneratorSpec, generate
from .spectrum import DEFAULT_EIGENVALUES

BENCH_METHODS = ("asymptotic", "permutation", "long")

CSV_COLUMNS = ["kind", "n", "parameter", "changeFraction", "changePoint", "method", "trials",
               "rejectionRate", "meanAbsError", "meanLocation", "varLocation",
               "meanElapsedMillis"]


@dataclass(frozen=True)
class TestSettings:
    """Knobs shared by every trial of a cell."""

    __test__ = False

    beta: float = 1.0
    alpha: float = DEFAULT_ALPHA
    m: int = DEFAULT_EIGENVALUES
    replicates: int = DEFAULT_REPLICATES
    grid_points: int = DEFAULT_GRID
    target_length: int = DEFAULT_TARGET_LENGTH


@dataclass(frozen=True)
class TrialOutcome:
    reject: bool
    location: int
    elapsed_millis: float


@dataclass(frozen=True)
class CellResult:
    rejection_rate: float
    mean_abs_error: float
    mean_location: float
    var_location: float
    mean_elapsed_millis: float
    outcomes: tuple = field(repr=False, compare=False)

    @property
    def locations(self) -> np.ndarray:
        return np.array([o.location for o in self.outcomes])

    @property
    def decisions(self) -> np.ndarray:
        return np.array([o.reject for o in self.outcomes])


def trial_seeds(master_seed: int, trial: int) -> tuple[int, int]:
    """(data seed, test seed) for one trial, derived from the cell seed."""
    state = np.random.SeedSequence(master_seed, spawn_key=(trial,)).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def run_trial(spec: GeneratorSpec, method: str, settings: TestSettings,
              trial: int) -> TrialOutcome:
    data_seed, test_seed = trial_seeds(spec.seed, trial)
    signal = generate(replace(spec, seed=data_seed))
    kernel_config = KernelConfig(settings.beta)
    sim = SimConfig(settings.grid_points, settings.replicates, test_seed)
    start = time.perf_counter()
    if method == "asymptotic":
        report = asymptotic_test(signal, kernel_config, settings.m, sim, settings.alpha)
    elif method == "permutation":
        report = permutation_test(signal, kernel_config, settings.replicates, settings.alpha,
                                  test_seed)
    elif method == "long":
        report = detect_long(signal, kernel_config, settings.m, sim, settings.alpha,
                             settings.target_length).to_report()
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {BENCH_METHODS}")
    elapsed = (time.perf_counter() - start) * 1000.0
    return TrialOutcome(bool(report.reject), int(report.k_star), elapsed)


def run_cell(spec: GeneratorSpec, method: str = "asymptotic",
             settings: TestSettings = TestSettings(), trials: int = 200,
             workers: int = 1) -> CellResult:
    """Run ``trials`` independent trials of one generator/method pair.

    ``spec.seed`` acts as the cell's master seed; trial i draws its data and
    test randomness from streams keyed by (seed, i), so the result does not
    depend on ``workers``.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if method not in BENCH_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {BENCH_METHODS}")

    def one(i):
        return run_trial(spec, method, settings, i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = tuple(pool.map(one, range(trials)))
    else:
        outcomes = tuple(one(i) for i in range(trials))

    locations = np.array([o.location for o in outcomes], dtype=np.float64)
    true_k = spec.change_index
    mae = float(np.mean(np.abs(locations - true_k))) if true_k is not None else math.nan
    return CellResult(
        rejection_rate=float(np.mean([o.reject for o in outcomes])),
        mean_abs_error=mae,
        mean_location=float(locations.mean()),
        var_location=float(locations.var()),
        mean_elapsed_millis=float(np.mean([o.elapsed_millis for o in outcomes])),
        outcomes=outcomes,
    )


@dataclass(frozen=True)
class ExperimentGrid:
    """Cartesian grid of generator cells crossed with test methods.

    Loaded from JSON with keys ``kind``, ``n``, ``parameters``,
    ``changeFractions``, ``trials``, ``alpha``, ``methods``, ``seed`` and the
    optional test knobs ``beta``, ``eigen``, ``replicates``, ``gridPoints``,
    ``targetLength``, ``workers``.
    """

    kind: str
    n_values: tuple
    parameters: tuple = (0.0,)
    change_fractions: tuple = (0.5,)
    trials: int = 200
    methods: tuple = ("asymptotic",)
    seed: int = 0
    settings: TestSettings = TestSettings()
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if min(self.n_values, default=0) < 4:
            raise ValueError("every n must be >= 4, the smallest testable signal")
        for method in self.methods:
            if method not in BENCH_METHODS:
                raise ValueError(f"unknown method {method!r}")
        list(self.cells())  # GeneratorSpec validates each cell

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentGrid":
        settings = TestSettings(
            beta=float(payload.get("beta", 1.0)),
            alpha=float(payload.get("alpha", DEFAULT_ALPHA)),
            m=int(payload.get("eigen", DEFAULT_EIGENVALUES)),
            replicates=int(payload.get("replicates", DEFAULT_REPLICATES)),
            grid_points=int(payload.get("gridPoints", DEFAULT_GRID)),
            target_length=int(payload.get("targetLength", DEFAULT_TARGET_LENGTH)),
        )
        return cls(
            kind=payload["kind"],
            n_values=tuple(int(n) for n in payload["n"]),
            parameters=tuple(float(p) for p in payload.get("parameters", [0.0])),
            change_fractions=tuple(float(g) for g in payload.get("changeFractions", [0.5])),
            trials=int(payload.get("trials", 200)),
            methods=tuple(payload.get("methods", ["asymptotic"])),
            seed=int(payload.get("seed", 0)),
            settings=settings,
            workers=int(payload.get("workers", 1)),
        )

    @classmethod
    def load(cls, path) -> "ExperimentGrid":
        with Path(path).open() as fh:
            return cls.from_dict(json.load(fh))

    def cells(self):
        """Yield ``(GeneratorSpec, method)`` in fixed grid order.

        All methods of one generator cell share its seed, hence its data.
        """
        index = 0
        for n in self.n_values:
            for parameter in self.parameters:
                for gamma in self.change_fractions:
                    cell_seed = int(np.random.SeedSequence(
                        self.seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])
                    index += 1
                    for method in self.methods:
                        yield GeneratorSpec(self.kind, n, gamma, parameter, cell_seed), method


def run_grid(grid: ExperimentGrid, out_path=None, seed: int | None = None) -> list[dict]:
    """Run every cell and optionally write one CSV row per cell.

    ``seed`` overrides the grid's master seed.
    """
    if seed is not None:
        grid = replace(grid, seed=seed)
    rows = []
    for spec, method in grid.cells():
        result = run_cell(spec, method, grid.settings, grid.trials, grid.workers)
        rows.append({
            "kind": spec.kind,
            "n": spec.n,
            "parameter": spec.parameter,
            "changeFraction": spec.change_fraction,
            "changePoint": spec.change_index if spec.change_index is not None else "",
            "method": method,
            "trials": grid.trials,
            "rejectionRate": result.rejection_rate,
            "meanAbsError": result.mean_abs_error,
            "meanLocation": result.mean_location,
            "varLocation": result.var_location,
            "meanElapsedMillis": result.mean_elapsed_millis,
        })
    if out_path is not None:
        with Path(out_path).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    return rows
