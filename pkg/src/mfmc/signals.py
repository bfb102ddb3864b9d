"""Uniformly sampled concentration signals and the algebra used to chain them."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, GridError

DEFAULT_DT = 0.005
DEFAULT_HORIZON = 20.0


@dataclass(frozen=True)
class Grid:
    t0: float = 0.0
    dt: float = DEFAULT_DT
    n: int = int(round(DEFAULT_HORIZON / DEFAULT_DT)) + 1

    def __post_init__(self):
        if not self.dt > 0 or self.n < 1:
            raise ConfigError(f"bad grid {self}")

    @classmethod
    def span(cls, horizon: float, dt: float = DEFAULT_DT, t0: float = 0.0) -> "Grid":
        return cls(t0, dt, int(round((horizon - t0) / dt)) + 1)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def horizon(self) -> float:
        return self.t0 + self.dt * (self.n - 1)


def _same_grid(a: "Grid", b: "Grid") -> bool:
    return a.n == b.n and np.isclose(a.dt, b.dt, rtol=1e-12, atol=0) \
        and np.isclose(a.t0, b.t0, rtol=0, atol=1e-9 * a.dt)


@dataclass(frozen=True, eq=False)
class ConcentrationSignal:
    grid: Grid
    samples: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.shape != (self.grid.n,):
            raise GridError(f"expected {self.grid.n} samples, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ConfigError("signal contains non-finite values")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    @property
    def dt(self) -> float:
        return self.grid.dt

    def peak(self) -> float:
        return float(self.samples.max(initial=0.0))

    def mass(self) -> float:
        return float(self.grid.dt * self.samples.sum())

    def renamed(self, name: str) -> "ConcentrationSignal":
        return ConcentrationSignal(self.grid, self.samples, name)

    def with_samples(self, samples) -> "ConcentrationSignal":
        return ConcentrationSignal(self.grid, samples, self.name)

    def __add__(self, other):
        return combine([(1.0, self), (1.0, other)])

    def __mul__(self, a):
        return scale(self, a)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PulseSpec:
    kind: str  # "step" | "rectangle" | "gaussian"
    amplitude: float
    start: float = 0.0
    stop: float | None = None
    centre: float | None = None
    width: float | None = None

    def __post_init__(self):
        if self.kind not in ("step", "rectangle", "gaussian"):
            raise ConfigError(f"unknown pulse kind {self.kind!r}")
        if not self.amplitude >= 0:
            raise ConfigError("pulse amplitude must be non-negative")
        if self.kind == "rectangle" and (self.stop is None or not self.stop > self.start):
            raise ConfigError("rectangle needs stop > start")
        if self.kind == "gaussian" and (self.centre is None or not (self.width or 0) > 0):
            raise ConfigError("gaussian needs centre and a positive width")


def step(amplitude: float, start: float = 0.0) -> PulseSpec:
    return PulseSpec("step", amplitude, start)


def rect(amplitude: float, start: float, stop: float) -> PulseSpec:
    return PulseSpec("rectangle", amplitude, start, stop)


def _first_index(t: float, grid: Grid) -> int:
    # index of the first grid point >= t, tolerant of float fuzz in t/dt
    return int(np.ceil((t - grid.t0) / grid.dt - 1e-9))


def generate(spec: PulseSpec, grid: Grid, name: str = "") -> ConcentrationSignal:
    k = np.arange(grid.n)
    if spec.kind == "step":
        s = np.where(k >= _first_index(spec.start, grid), spec.amplitude, 0.0)
    elif spec.kind == "rectangle":
        on = (k >= _first_index(spec.start, grid)) & (k < _first_index(spec.stop, grid))
        s = np.where(on, spec.amplitude, 0.0)
    else:
        # amplitude * exp(-(t - centre)^2 / width), width in s^2
        s = spec.amplitude * np.exp(-((grid.t - spec.centre) ** 2) / spec.width)
    return ConcentrationSignal(grid, s, name)


def zeros(grid: Grid, name: str = "") -> ConcentrationSignal:
    return ConcentrationSignal(grid, np.zeros(grid.n), name)


def constant(value: float, grid: Grid, name: str = "") -> ConcentrationSignal:
    return ConcentrationSignal(grid, np.full(grid.n, float(value)), name)


def convolve(f: ConcentrationSignal, kernel) -> ConcentrationSignal:
    """Causal discrete convolution with a kernel density, truncated to f's grid.

    ``kernel`` needs ``dt`` and ``samples`` (a density, 1/s).  The sum is
    scaled by dt and clipped at zero afterwards.
    """
    if not np.isclose(f.dt, kernel.dt, rtol=1e-12, atol=0):
        raise GridError(f"grid step mismatch: {f.dt} vs {kernel.dt}")
    h = np.asarray(kernel.samples, dtype=float)[: f.grid.n]
    out = np.convolve(f.samples, h)[: f.grid.n] * f.dt
    return f.with_samples(np.maximum(out, 0.0))


def combine(weighted: Iterable[tuple[float, ConcentrationSignal]]) -> ConcentrationSignal:
    weighted = list(weighted)
    if not weighted:
        raise ConfigError("nothing to combine")
    grid = weighted[0][1].grid
    acc = np.zeros(grid.n)
    for a, s in weighted:
        if not _same_grid(grid, s.grid):
            raise GridError("signals live on different grids")
        acc = acc + a * s.samples
    return ConcentrationSignal(grid, acc, weighted[0][1].name)


def scale(f: ConcentrationSignal, a: float) -> ConcentrationSignal:
    return f.with_samples(a * f.samples)


def delay(f: ConcentrationSignal, tau: float) -> ConcentrationSignal:
    """Shift right by tau, snapped to the nearest grid point; zero fill."""
    n = f.grid.n
    k = max(-n, min(n, int(round(tau / f.dt))))
    s = np.zeros_like(f.samples)
    if k >= 0:
        s[k:] = f.samples[: n - k]
    else:
        s[: n + k] = f.samples[-k:]
    return f.with_samples(s)


def pointwise_min(a: ConcentrationSignal, b: ConcentrationSignal) -> ConcentrationSignal:
    if not _same_grid(a.grid, b.grid):
        raise GridError("signals live on different grids")
    return a.with_samples(np.minimum(a.samples, b.samples))


def to_csv(signals: Sequence[ConcentrationSignal], names: Sequence[str] | None = None) -> str:
    """CSV text with a shared time column; floats written with repr precision."""
    names = list(names or [s.name or f"c{i}" for i, s in enumerate(signals)])
    grid = signals[0].grid
    for s in signals[1:]:
        if not _same_grid(grid, s.grid):
            raise GridError("signals live on different grids")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + names)
    cols = [grid.t] + [s.samples for s in signals]
    for row in zip(*cols):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    t = data[:, 0]
    dt = float(np.round(t[1] - t[0], 12)) if len(t) > 1 else DEFAULT_DT
    grid = Grid(float(t[0]), dt, len(t))
    return [ConcentrationSignal(grid, data[:, j], header[j]) for j in range(1, len(header))]
