"""Test report record and its JSON serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

METHODS = ("asymptotic", "permutation", "long")

P_VALUE_RULE = "count(s_r >= tStar) / R; tStar <= 0 gives 1"

_FIELDS = (
    ("method", "method"),
    ("n", "n"),
    ("d", "d"),
    ("beta", "beta"),
    ("alpha", "alpha"),
    ("k_star", "kStar"),
    ("t_star", "tStar"),
    ("p_value", "pValue"),
    ("reject", "reject"),
    ("eigenvalues_used", "eigenvaluesUsed"),
    ("replicates", "replicates"),
    ("grid_points", "gridPoints"),
    ("seed", "seed"),
    ("elapsed_millis", "elapsedMillis"),
    ("refined_window", "refinedWindow"),
)


@dataclass
class TestReport:
    """Outcome of one change-point test.

    ``k_star`` is the size of the left block at the detected split, so the
    change is placed after observation ``k_star`` (1-based). Fields that do
    not apply to a method (``eigenvalues_used`` and ``grid_points`` for the
    permutation test) are ``None``.
    """

    __test__ = False  # not a pytest test class

    method: str
    n: int
    d: int
    beta: float
    alpha: float
    k_star: int
    t_star: float
    p_value: float
    reject: bool
    eigenvalues_used: int | None
    replicates: int
    grid_points: int | None
    seed: int
    elapsed_millis: dict = field(default_factory=dict)
    refined_window: tuple[int, int] | None = None
    eigenvalues: np.ndarray | None = field(default=None, compare=False, repr=False)
    sup_values: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")
        if self.reject != (self.p_value <= self.alpha):
            raise ValueError("reject flag inconsistent with p-value and alpha")

    def to_dict(self) -> dict:
        out = {}
        for attr, key in _FIELDS:
            value = getattr(self, attr)
            if attr == "refined_window":
                if value is None:
                    continue
                value = [int(value[0]), int(value[1])]
            elif attr == "elapsed_millis":
                value = {k: float(v) for k, v in value.items()}
            elif isinstance(value, (bool, np.bool_)):
                value = bool(value)
            elif isinstance(value, (np.integer,)):
                value = int(value)
            elif isinstance(value, (np.floating,)):
                value = float(value)
            out[key] = value
        out["pValueRule"] = P_VALUE_RULE
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "TestReport":
        kwargs = {}
        for attr, key in _FIELDS:
            if key not in payload:
                if attr == "refined_window":
                    continue
                raise ValueError(f"report is missing field {key!r}")
            value = payload[key]
            if attr == "refined_window" and value is not None:
                value = (int(value[0]), int(value[1]))
            kwargs[attr] = value
        return cls(**kwargs)


def write_report(report: TestReport, path) -> None:
    """Write ``report`` as a JSON document. Missing directories are an error."""
    payload = report.to_dict()
    for key in ("tStar", "pValue", "beta", "alpha"):
        if not math.isfinite(payload[key]):
            raise ValueError(f"report field {key} is not finite")
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_report(path) -> TestReport:
    with Path(path).open() as fh:
        return TestReport.from_dict(json.load(fh))
