"""Pressure-driven flow in rectangular microchannels.

Velocity profile, flow rate and hydraulic resistance come from the odd-term
Fourier series for Poiseuille flow in a rectangular duct.  Junctions are
lumped: streams mix instantly and concentrations are flow weighted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError

SERIES_RTOL = 1e-10
MAX_ODD_TERMS = 201


@dataclass(frozen=True)
class ChannelGeometry:
    width: float
    height: float
    length: float = 1.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0 and self.length > 0):
            raise ConfigError(f"channel dimensions must be positive: {self}")

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class FluidProperties:
    viscosity: float = 1e-3
    pressure_gradient: float = 0.0  # Pa/m

    def __post_init__(self):
        if not self.viscosity > 0:
            raise ConfigError("viscosity must be positive")


@dataclass(frozen=True)
class FlowState:
    flow_rate: float
    velocity: float

    @classmethod
    def from_velocity(cls, velocity: float, geom: ChannelGeometry) -> "FlowState":
        return cls(velocity * geom.area, velocity)

    @classmethod
    def from_flow_rate(cls, flow_rate: float, geom: ChannelGeometry) -> "FlowState":
        return cls(flow_rate, flow_rate / geom.area)


@dataclass(frozen=True)
class JunctionSpec:
    inlets: tuple  # of (FlowState, tuple of concentrations)
    outlet: ChannelGeometry | None = None

    def __post_init__(self):
        if len(self.inlets) == 0:
            raise ConfigError("junction needs at least one inlet")
        widths = {len(c) for _, c in self.inlets}
        if len(widths) != 1:
            raise ConfigError("every inlet must list the same species")
        for fs, conc in self.inlets:
            if fs.flow_rate < 0 or min(conc, default=0.0) < 0:
                raise ConfigError("flow rates and concentrations must be non-negative")


def _odd(n_terms: int) -> np.ndarray:
    return 2 * np.arange(n_terms) + 1.0


def _truncate(terms: np.ndarray) -> int:
    """Number of leading terms to keep: stop once a term is negligible."""
    total = np.cumsum(terms)
    rel = np.abs(terms) / np.maximum(np.abs(total), np.finfo(float).tiny)
    small = np.nonzero(rel < SERIES_RTOL)[0]
    return int(small[0]) + 1 if small.size else len(terms)


def _series(fn, n_terms):
    """Sum fn(n) over odd n, either a fixed count or the adaptive default."""
    if n_terms is not None:
        if n_terms < 1:
            raise ConfigError("n_terms must be >= 1")
        return fn(_odd(n_terms)).sum(axis=0)
    terms = fn(_odd(MAX_ODD_TERMS))
    k = _truncate(np.abs(terms).reshape(len(terms), -1).max(axis=1))
    return terms[:k].sum(axis=0)


def poiseuille_velocity(y, z, geom: ChannelGeometry, fluid: FluidProperties,
                        n_terms: int | None = None):
    """Axial velocity at (y, z) with |y| <= w/2 across the width and 0 <= z <= h."""
    w, h = geom.width, geom.height
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    tol = 1e-12 * max(w, h)
    if np.any(np.abs(y) > w / 2 + tol) or np.any(z < -tol) or np.any(z > h + tol):
        raise DomainError("point lies outside the channel cross-section")
    pref = 4 * h**2 * fluid.pressure_gradient / (np.pi**3 * fluid.viscosity)

    def term(n):
        n = n.reshape((-1,) + (1,) * y.ndim)
        # cosh ratio written with exponentials so large n*w/h cannot overflow
        a = n * np.pi / h
        ratio = np.exp(a * (np.abs(y) - w / 2)) * (1 + np.exp(-2 * a * np.abs(y))) \
            / (1 + np.exp(-a * w))
        return (1 - ratio) * np.sin(a * z) / n**3

    out = pref * _series(term, n_terms)
    return out if out.ndim else float(out)


def _shape_factor(geom: ChannelGeometry, n_terms=None) -> float:
    # 1 - (192 h / (pi^5 w)) * sum tanh(n pi w / 2h) / n^5, with h the smaller side
    a, b = max(geom.width, geom.height), min(geom.width, geom.height)
    s = _series(lambda n: np.tanh(n * np.pi * a / (2 * b)) / n**5, n_terms)
    return 1 - 192 * b / (np.pi**5 * a) * s


def volumetric_flow_rate(geom: ChannelGeometry, fluid: FluidProperties,
                         n_terms: int | None = None) -> float:
    """Flow rate from integrating the velocity series over the cross-section."""
    w, h = geom.width, geom.height
    pref = 8 * h**3 * w * fluid.pressure_gradient / (np.pi**4 * fluid.viscosity)
    s = _series(lambda n: 1 / n**4 - 2 * h / (np.pi * w * n**5) * np.tanh(n * np.pi * w / (2 * h)),
                n_terms)
    return float(pref * s)


def avg_velocity(geom: ChannelGeometry, fluid: FluidProperties, n_terms=None) -> float:
    return volumetric_flow_rate(geom, fluid, n_terms) / geom.area


def hydraulic_resistance(geom: ChannelGeometry, fluid: FluidProperties,
                         n_terms: int | None = None) -> float:
    a, b = max(geom.width, geom.height), min(geom.width, geom.height)
    return float(12 * fluid.viscosity * geom.length / (a * b**3 * _shape_factor(geom, n_terms)))


def equivalent_resistance(resistances: Sequence[float]) -> float:
    r = np.asarray(resistances, dtype=float)
    if r.size == 0 or np.any(r <= 0):
        raise ConfigError("need positive resistances")
    return float(1.0 / np.sum(1.0 / r))


def combine_junction(spec: JunctionSpec):
    """Merge inlets into one stream.  Returns (FlowState, mixed concentrations).

    The outlet velocity uses the outlet geometry if given, otherwise the inlet
    velocities are summed, which is the equal-cross-section case.
    """
    q = np.array([fs.flow_rate for fs, _ in spec.inlets])
    conc = np.array([c for _, c in spec.inlets], dtype=float)
    q_out = q.sum()
    if not q_out > 0:
        raise DomainError("degenerate junction: total inflow is zero")
    mixed = (q[:, None] * conc).sum(axis=0) / q_out
    if spec.outlet is not None:
        state = FlowState.from_flow_rate(q_out, spec.outlet)
    else:
        state = FlowState(q_out, sum(fs.velocity for fs, _ in spec.inlets))
    return state, tuple(mixed)


def split_junction(inlet: FlowState, daughters: Sequence[ChannelGeometry],
                   fluid: FluidProperties | None = None) -> list:
    """Divide a stream among parallel daughter channels like a current divider."""
    if len(daughters) == 0:
        raise ConfigError("split needs at least one daughter channel")
    fluid = fluid or FluidProperties()
    r = np.array([hydraulic_resistance(g, fluid) for g in daughters])
    g = 1.0 / r
    shares = g / g.sum()
    return [FlowState.from_flow_rate(inlet.flow_rate * s, d) for s, d in zip(shares, daughters)]


def equal_inlet_cascade(n_inlets: int, velocity: float, geom: ChannelGeometry):
    """Chain of combining channels fed by n equal inlets.

    Returns a list of (velocity, dilution of each inlet species) for the
    combining channels 1..n-1, where inlet i joins before channel i.
    """
    if n_inlets < 2:
        raise ConfigError("a cascade needs at least two inlets")
    inlet = FlowState.from_velocity(velocity, geom)
    state = inlet
    conc = np.eye(n_inlets)[0]
    out = []
    for i in range(1, n_inlets):
        spec = JunctionSpec(((state, tuple(conc)), (inlet, tuple(np.eye(n_inlets)[i]))),
                            outlet=geom)
        state, mixed = combine_junction(spec)
        conc = np.array(mixed)
        out.append((state.velocity, conc.copy()))
    return out
