"""Signal container, CSV ingestion and the synthetic generators.

Observations are stored row-wise in temporal order. All generators are
pure functions of their :class:`GeneratorSpec`: the same spec always yields
a bit-identical signal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KINDS = ("mean-shift", "variance-shift", "tail-shift", "iid-null")


class SignalError(ValueError):
    """Raised for malformed signal files or invalid signal contents."""


@dataclass(frozen=True, eq=False)
class Signal:
    """An ordered n x d sequence of finite real observations."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        if data.ndim != 2:
            raise SignalError(f"signal must be 1-D or 2-D, got {data.ndim} dimensions")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise SignalError(f"signal must be non-empty, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise SignalError("signal contains NaN or infinite values")
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, index) -> "Signal":
        return Signal(self.data[index])

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))


def load_signal(path, has_header: bool = False) -> Signal:
    """Read a comma-separated file with one observation per row.

    Parameters
    ----------
    path : str or Path
        CSV file, '.' as decimal separator.
    has_header : bool
        Skip the first row.

    Raises
    ------
    OSError
        If the file cannot be read.
    SignalError
        On empty input, ragged rows or unparseable / non-finite fields.
        Row and column numbers in messages are 1-based and count the
        header row when present.
    """
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for row_no, row in enumerate(reader, start=1):
            if has_header and row_no == 1:
                continue
            if not row or all(not field.strip() for field in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise SignalError(
                    f"row {row_no}: expected {width} columns, found {len(row)}"
                )
            values = []
            for col_no, field in enumerate(row, start=1):
                try:
                    value = float(field)
                except ValueError:
                    raise SignalError(
                        f"row {row_no}, column {col_no}: cannot parse {field.strip()!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise SignalError(f"row {row_no}, column {col_no}: non-finite value {field.strip()!r}")
                values.append(value)
            rows.append(values)
    if not rows:
        raise SignalError(f"{path}: no observations found")
    return Signal(np.array(rows, dtype=np.float64))


def save_signal(signal: Signal, path, header=None) -> None:
    """Write a signal as CSV using shortest round-trip float formatting."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in signal.data:
            writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of a synthetic signal with at most one change-point.

    The first ``floor(n * change_fraction)`` points are i.i.d. N(0, 1); the
    remainder follow the post-change law selected by ``kind``:

    * ``mean-shift``: N(parameter, 1)
    * ``variance-shift``: N(0, parameter)  (parameter is the variance)
    * ``tail-shift``: Student t with ``parameter`` degrees of freedom
    * ``iid-null``: N(0, 1) throughout, parameter ignored
    """

    kind: str
    n: int
    change_fraction: float = 0.5
    parameter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.kind == "iid-null":
            return
        if not 0 < self.change_fraction < 1:
            raise ValueError(f"change_fraction must lie in (0, 1), got {self.change_fraction}")
        k = self.change_index
        if k < 1 or self.n - k < 1:
            raise ValueError(
                f"n={self.n}, change_fraction={self.change_fraction} leaves an empty segment"
            )
        if self.kind == "variance-shift" and not self.parameter > 0:
            raise ValueError(f"variance must be positive, got {self.parameter}")
        if self.kind == "tail-shift" and not self.parameter > 0:
            raise ValueError(f"degrees of freedom must be positive, got {self.parameter}")
        if not math.isfinite(self.parameter):
            raise ValueError("parameter must be finite")

    @property
    def change_index(self):
        """Number of pre-change points, or None for ``iid-null``."""
        if self.kind == "iid-null":
            return None
        return int(math.floor(self.n * self.change_fraction))


def _student_t(rng: np.random.Generator, dof: float, size: int) -> np.ndarray:
    z = rng.standard_normal(size)
    if float(dof).is_integer() and dof <= 64:
        chi2 = np.square(rng.standard_normal((size, int(dof)))).sum(axis=1)
    else:
        chi2 = rng.chisquare(dof, size)
    return z / np.sqrt(chi2 / dof)


def generate(spec: GeneratorSpec) -> Signal:
    """Draw a 1-D synthetic signal according to ``spec``.

    A base vector of n standard normals is drawn first, so a zero mean
    shift reproduces ``iid-null`` bit-for-bit under the same seed.
    """
    rng = np.random.default_rng(spec.seed)
    x = rng.standard_normal(spec.n)
    if spec.kind == "iid-null":
        return Signal(x)
    k = spec.change_index
    if spec.kind == "mean-shift":
        if spec.parameter != 0:
            x[k:] += spec.parameter
    elif spec.kind == "variance-shift":
        x[k:] *= math.sqrt(spec.parameter)
    else:
        x[k:] = _student_t(rng, spec.parameter, spec.n - k)
    return Signal(x)
