"""AND gate built from the elementary blocks, and its threshold window.

Two inputs I1, I2 each react with a supply M, the two products N merge into
one stream, N is thresholded against ThL so that only the region where both
inputs were HIGH survives, and the survivor gates an amplifier.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, ConvergenceError
from .operators import BlockGeometry, op_F, op_G, op_T
from .reactions import DEFAULT_THETA
from .signals import ConcentrationSignal, Grid, combine, constant, generate, rect, zeros
from .transfer import DispersionParams, apply_channel

HIGH_FRAC = 0.25
LOW_FRAC = 0.05


class SteadyState(NamedTuple):
    value: float
    slope: float  # relative change across the averaging window


def steady_state(f: ConcentrationSignal, tail_fraction: float = 0.2,
                 slope_tol: float = 1e-3) -> SteadyState:
    """Mean over the trailing part of the horizon, refusing signals still moving."""
    if not 0 < tail_fraction < 1:
        raise ConfigError("tail_fraction must lie in (0, 1)")
    s = f.samples
    m = max(2, int(round(tail_fraction * len(s))))
    tail = s[-m:]
    t = f.t[-m:]
    level = float(tail.mean())
    slope = np.polyfit(t - t[0], tail, 1)[0]
    scale = max(abs(level), 1e-12 * max(f.peak(), 1.0))
    rel = float(abs(slope) * (t[-1] - t[0]) / scale) if np.ptp(tail) > 0 else 0.0
    if rel > slope_tol:
        raise ConvergenceError("signal has not settled by the end of the horizon",
                               level=level, relative_slope=rel)
    return SteadyState(level, rel)


@dataclass(frozen=True)
class AndGateParams:
    I1: ConcentrationSignal
    I2: ConcentrationSignal
    M0: float = 8.0
    ThL0: float = 10.0
    Amp0: float = 12.0
    blocks: BlockGeometry = field(default_factory=BlockGeometry)
    L_A2: float = 120e-6
    p: DispersionParams = field(default_factory=DispersionParams.fixed)
    theta: float = DEFAULT_THETA
    # velocity multipliers: input blocks, transport of N, thresholding block
    n_in: float = 2
    n_N: float = 4
    n_thl: float = 5
    inputs_at_gate: bool = False  # inputs already transported to the G blocks

    def __post_init__(self):
        if min(self.M0, self.ThL0, self.Amp0) < 0:
            raise ConfigError("injected concentrations must be non-negative")
        if min(self.L_A2, self.blocks.L_R) <= 0:
            raise ConfigError("lengths must be positive")

    @property
    def grid(self) -> Grid:
        return self.I1.grid

    def with_(self, **kw) -> "AndGateParams":
        return replace(self, **kw)

    @property
    def high_level(self) -> float:
        """Expected output plateau when the gate fires."""
        return self.Amp0 / (self.n_thl + 1)


def default_and_params(thl: float = 10.0, bits=(1, 1), grid: Grid | None = None,
                       **kw) -> AndGateParams:
    """AND gate with the reference inputs 8[u(t-1)-u(t-3)] and 8[u(t-2)-u(t-4)]."""
    grid = grid or Grid()
    i1 = generate(rect(8.0, 1.0, 3.0), grid, "I1") if bits[0] else zeros(grid, "I1")
    i2 = generate(rect(8.0, 2.0, 4.0), grid, "I2") if bits[1] else zeros(grid, "I2")
    return AndGateParams(i1, i2, ThL0=thl, **kw)


class GateTrace(NamedTuple):
    inputs: tuple
    N: ConcentrationSignal
    ThL: ConcentrationSignal
    output: ConcentrationSignal


def and_gate_trace(params: AndGateParams) -> GateTrace:
    P, b = params, params.blocks
    g = P.grid
    M = op_T(constant(P.M0, g, "M"), 1, b.L_T, P.p)
    if P.inputs_at_gate:
        a1, a2 = P.I1, P.I2
    else:
        a1, a2 = op_T(P.I1, 1, b.L_T, P.p), op_T(P.I2, 1, b.L_T, P.p)
    n1 = op_G(a1, M, P.n_in, b, P.p)
    n2 = op_G(a2, M, P.n_in, b, P.p)
    N = apply_channel(combine([(0.5, n1), (0.5, n2)]), P.L_A2, P.p, P.n_in)
    thl = op_T(constant(P.ThL0, g, "ThL"), 1, b.L_T, P.p)
    amp = op_T(constant(P.Amp0, g, "Amp"), 1, b.L_T, P.p)
    out = op_F(op_T(N, P.n_N, b.L_T, P.p), thl, amp, P.n_thl, b, P.p, P.theta)
    return GateTrace((a1, a2), N.renamed("N"), thl, out.renamed("O"))


def and_gate(params: AndGateParams) -> ConcentrationSignal:
    return and_gate_trace(params).output


@dataclass(frozen=True)
class ThlWindow:
    lower: float  # C1 at the thresholding junction
    upper: float  # 2 C1
    gain: float  # junction level per unit of injected ThL

    @property
    def injected(self) -> tuple:
        if self.gain <= 0:
            return (0.0, 0.0)
        return (self.lower / self.gain, self.upper / self.gain)

    def contains(self, thl0: float) -> bool:
        lo, hi = self.injected
        return lo < thl0 < hi


def thl_level(params: AndGateParams, thl0: float | None = None) -> float:
    """Steady ThL concentration where it meets N."""
    P, b = params, params.blocks
    thl0 = P.ThL0 if thl0 is None else thl0
    s = op_T(constant(thl0, P.grid), 1, b.L_T, P.p)
    s = apply_channel(s, P.n_thl * b.L_B + b.L_C, P.p, P.n_thl)
    return steady_state(s * (1 / P.n_thl)).value


def thl_window(params: AndGateParams, high: float | None = None) -> ThlWindow:
    """Range of junction ThL levels that keep only the both-HIGH region.

    C1 is the steady N level reaching the thresholding reaction when one input
    is held HIGH; both HIGH gives 2 C1.  ``high`` defaults to the peak of I1.
    """
    P, b = params, params.blocks
    g = P.grid
    c0 = P.I1.peak() if high is None else high
    src = op_T(constant(c0, g), 1, b.L_T, P.p)
    M = op_T(constant(P.M0, g), 1, b.L_T, P.p)
    s = op_G(src, M, P.n_in, b, P.p)
    s = apply_channel(s, P.L_A2, P.p, P.n_in)
    s = apply_channel(s, b.L_T, P.p, P.n_N)
    s = apply_channel(s, P.n_thl * b.L_B + b.L_C, P.p, P.n_thl)
    c1 = (P.n_thl - 1) / P.n_thl * 0.5 * steady_state(s).value
    return ThlWindow(c1, 2 * c1, thl_level(P, 1.0))


def truth_table(params: AndGateParams, one_bits=None):
    """Peak output for each input combination.

    Returns {(b1, b2): peak}.  ``one_bits`` are the HIGH inputs; by default the
    signals in params are the HIGH versions.
    """
    hi1, hi2 = one_bits or (params.I1, params.I2)
    g = params.grid
    out = {}
    for b1 in (0, 1):
        for b2 in (0, 1):
            q = params.with_(I1=hi1 if b1 else zeros(g, "I1"), I2=hi2 if b2 else zeros(g, "I2"))
            out[(b1, b2)] = and_gate(q).peak()
    return out


def is_and(table: dict, high_level: float) -> bool:
    """True when only (1, 1) clears the HIGH threshold."""
    for bits, peak in table.items():
        if (peak > HIGH_FRAC * high_level) != (bits == (1, 1)):
            return False
    return True


def high_interval(f: ConcentrationSignal, frac: float = 0.5):
    """First and last time f exceeds frac times its peak, or None."""
    if f.peak() <= 0:
        return None
    idx = np.nonzero(f.samples > frac * f.peak())[0]
    return (float(f.t[idx[0]]), float(f.t[idx[-1]]))
