"""Four-level concentration shift keying built from AND gates.

Transmitter: a 2:4 decoder.  Four AND units take the inputs I1, I2 or their
complements P1, P2 (left over after I + P -> W), so exactly one unit sees
two HIGH inputs.  Each unit amplifies a different Amp supply, which sets the
output level.

Receiver: three detection units threshold the incoming level against T1^i
and produce rectangular B1, B2, B3.  Then Y2 = B2 AND B1, and
Y1 = B1 AND (B3 XNOR B2) through an XOR, a NOT and a final AND stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .circuits import AndGateParams, and_gate, steady_state
from .errors import AlignmentError, ConfigError
from .hydraulics import FlowState, JunctionSpec, combine_junction, ChannelGeometry
from .operators import BlockGeometry, op_A, op_F, op_G, op_R, op_T
from .reactions import DEFAULT_THETA
from .signals import (ConcentrationSignal, Grid, PulseSpec, combine, constant, generate,
                      rect, zeros)
from .transfer import DispersionParams, apply_channel, kernel

# decoder wiring: unit -> (first input, second input)
UNIT_INPUTS = {1: ("P1", "P2"), 2: ("I1", "P2"), 3: ("P1", "I2"), 4: ("I1", "I2")}


def selected_unit(bits) -> int:
    b2, b1 = bits
    return 1 + int(b1) + 2 * int(b2)


@dataclass(frozen=True)
class TxParams:
    bits: tuple = (1, 1)  # (b2, b1); b1 drives I1, b2 drives I2
    C0: float = 12.0
    P1: PulseSpec = field(default_factory=lambda: rect(12.0, 1.0, 3.0))
    P2: PulseSpec = field(default_factory=lambda: rect(12.0, 1.0, 3.0))
    M0: float = 12.0
    ThL0: float = 16.0
    amps: tuple = (0.0, 8.0, 16.0, 24.0)  # units 1..4
    buffers: tuple = (100e-6, 150e-6, 350e-6, 400e-6)  # units 1..4
    window: tuple = (1.0, 3.0)  # bit pulse support
    blocks: BlockGeometry = field(default_factory=BlockGeometry)
    L_A2: float = 120e-6
    p: DispersionParams = field(default_factory=DispersionParams.fixed)
    theta: float = DEFAULT_THETA
    grid: Grid = field(default_factory=Grid)

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits) or len(self.bits) != 2:
            raise ConfigError(f"bits must be a pair of 0/1, got {self.bits}")
        a = self.amps
        if not (a[3] > a[2] > a[1] > a[0] >= 0):
            raise ConfigError("amplifier supplies must increase strictly from unit 1 to 4")
        if len(self.buffers) != 4 or min(self.buffers) <= 0:
            raise ConfigError("need four positive buffer lengths")

    def with_(self, **kw) -> "TxParams":
        return replace(self, **kw)

    def high_level(self, unit: int) -> float:
        return self.amps[unit - 1] / 8.0


def tx_inputs(params: TxParams) -> dict:
    g = params.grid
    b2, b1 = params.bits
    lo, hi = params.window
    bit = lambda on, name: generate(rect(params.C0, lo, hi), g, name) if on else zeros(g, name)
    return {"I1": bit(b1, "I1"), "I2": bit(b2, "I2"),
            "P1": generate(params.P1, g, "P1"), "P2": generate(params.P2, g, "P2")}


def _unit_inputs(params: TxParams, unit: int, raw: dict) -> dict:
    """Streams entering unit's AND gate (location x1)."""
    P, b = params, params.blocks
    lb = P.buffers[unit - 1]
    # direct path: transport, then L_C + L_B + L_R at twice the speed
    direct = {k: apply_channel(op_T(raw[k], 1, b.L_T, P.p), b.L_C + lb + b.L_R, P.p, 2) * 0.5
              for k in ("I1", "I2")}
    # complement path: P - I in a block whose buffer makes both paths equally long
    rb = b.with_(L_B=lb / 2)
    comp = {f"P{i}": op_R(op_T(raw[f"P{i}"], 1, b.L_T, P.p), op_T(raw[f"I{i}"], 1, b.L_T, P.p),
                          2, rb, P.p) for i in (1, 2)}
    return {**direct, **comp}


def tx_modulate(params: TxParams) -> dict:
    """Outputs of the four decoder units, keyed 1..4."""
    raw = tx_inputs(params)
    out = {}
    for unit in (1, 2, 3, 4):
        at_x1 = _unit_inputs(params, unit, raw)
        a, c = UNIT_INPUTS[unit]
        gate = AndGateParams(at_x1[a], at_x1[c], M0=params.M0, ThL0=params.ThL0,
                             Amp0=params.amps[unit - 1], blocks=params.blocks,
                             L_A2=params.L_A2, p=params.p, theta=params.theta,
                             n_in=3, n_N=6, n_thl=7, inputs_at_gate=True)
        out[unit] = and_gate(gate).renamed(f"O{unit}")
    return out


def tx_output(params: TxParams) -> ConcentrationSignal:
    """Transmitted signal: the unit outputs share one outlet."""
    units = tx_modulate(params)
    return combine([(1.0, s) for s in units.values()]).renamed("O")


TABLE4 = {1: 80, 2: 20, 3: 100, 4: 500, 5: 150, 6: 200, 7: 350, 8: 400, 9: 170, 10: 180,
          11: 180, 12: 200, 13: 250, 14: 500, 15: 550, 16: 1911, 17: 50, 18: 300, 19: 750,
          20: 800}


@dataclass(frozen=True)
class RxParams:
    T1: tuple = (0.5, 1.5, 2.5)
    A1: float = 9.0
    A2: float = 24.0
    A3: float = 20.0
    A4: float = 20.0
    A5: float = 51.0
    T2: float = 14.0
    T3: float = 7.0
    T4: float = 40.0
    NOT0: float = 22.0
    V: float = 28.0
    lengths_um: dict = field(default_factory=lambda: dict(TABLE4))
    width: float = 20e-6
    height: float = 10e-6
    L_B: float = 50e-6
    p: DispersionParams = field(default_factory=DispersionParams.fixed)
    theta: float = DEFAULT_THETA
    decision_frac: float = 0.5
    # dilute the NOT stage by flow share instead of argument position
    flow_weighted_not: bool = False
    check_sync: bool = True

    def __post_init__(self):
        t = self.T1
        if not (len(t) == 3 and t[0] < t[1] < t[2]):
            raise ConfigError("detection thresholds must increase")
        if any(v <= 0 for v in self.lengths_um.values()):
            raise ConfigError("channel lengths must be positive")
        if not 0 < self.decision_frac < 1:
            raise ConfigError("decision_frac must lie in (0, 1)")

    def with_(self, **kw) -> "RxParams":
        return replace(self, **kw)

    def L(self, i: int) -> float:
        return self.lengths_um[i] * 1e-6

    @property
    def blocks(self) -> BlockGeometry:
        return BlockGeometry(L_T=self.L(1), L_C=self.L(2), L_B=self.L_B, L_R=self.L(4))


def _T(f, p: RxParams, n=1):
    return op_T(f, n, p.L(1), p.p)


def _supply(value, like: ConcentrationSignal, p: RxParams, name=""):
    return _T(constant(value, like.grid, name), p)


def rx_frontend(c_o: ConcentrationSignal, params: RxParams):
    """Detection outputs (B1, B2, B3)."""
    P, b = params, params.blocks
    x = _T(c_o, P)
    a1 = _supply(P.A1, c_o, P, "A1")
    return tuple(op_F(x, _supply(th, c_o, P), a1, 2, b, P.p, P.theta).renamed(f"B{i + 1}")
                 for i, th in enumerate(P.T1))


def rx_y2(b1, b2, params: RxParams) -> ConcentrationSignal:
    P, bl = params, params.blocks
    L, h = P.L, P.height
    x = apply_channel(combine([(0.5, b1), (0.5, b2)]), (2 * L(2) + L(6) + h) / 2, P.p, 3)
    out = op_F(_T(x, P, 6), _supply(P.T2, b1, P), _supply(P.A2, b1, P), 7, bl, P.p, P.theta)
    return out.renamed("Y2")


class Y1Trace(NamedTuple):
    R1: ConcentrationSignal
    R2: ConcentrationSignal
    xor: ConcentrationSignal
    not23: ConcentrationSignal
    not1: ConcentrationSignal
    output: ConcentrationSignal


def _path_delay_and_rise(segments, p: DispersionParams, grid: Grid):
    """Mean transit time of a chain of (length, multiplier) channels and the
    10-90% rise time of its combined step response."""
    delay = sum(x / (n * p.v_eff) for x, n in segments)
    h = np.zeros(grid.n)
    h[0] = 1.0
    for x, n in segments:
        h = np.convolve(h, kernel(x, p, grid, n).samples * grid.dt)[: grid.n]
    cdf = np.cumsum(h) / h.sum()
    rise = grid.dt * (np.searchsorted(cdf, 0.9) - np.searchsorted(cdf, 0.1))
    return delay, rise


def sync_report(params: RxParams, grid: Grid) -> dict:
    """Arrival of the two NOT streams at their merge point, from x5 onwards."""
    P, b = params, params.blocks
    L, h, w = P.L, P.height, P.width
    xor_path = [((3 * L(2) + L(9) + 2 * L(10) + L(11) + h + 2 * w) / 2, 1.5), (b.L_T, 3),
                (4 * b.L_B + b.L_C, 4), (b.L_R, 4), (5 * b.L_B + b.L_C, 5), (b.L_R, 5),
                ((L(2) + L(9) + 2 * w) / 2, 5), (L(14), 10), (L(4), 10),
                (11 * b.L_B + b.L_C, 11), (b.L_R, 11), ((2 * L(2) + L(18) + h) / 2, 11)]
    b1_path = [(L(16), 3), (4 * b.L_B + b.L_C, 4), (b.L_R, 4),
               ((2 * L(2) + 2 * L(17) + L(18) + h) / 2, 4)]
    d23, rise23 = _path_delay_and_rise(xor_path, P.p, grid)
    d1, rise1 = _path_delay_and_rise(b1_path, P.p, grid)
    return {"delay_not23": d23, "delay_not1": d1, "mismatch": abs(d23 - d1),
            "rise": min(rise1, rise23)}


def rx_y1_trace(b1, b2, b3, params: RxParams) -> Y1Trace:
    P, bl = params, params.blocks
    L, h, w = P.L, P.height, P.width
    if P.check_sync:
        rep = sync_report(P, b1.grid)
        if rep["mismatch"] > 0.5 * rep["rise"]:
            raise AlignmentError("NOT streams reach the merge point out of step", **rep)
    x23 = apply_channel(combine([(0.5, b2), (0.5, b3)]),
                        (3 * L(2) + L(9) + 2 * L(10) + L(11) + h + 2 * w) / 2, P.p, 1.5)
    outer = _T(x23, P, 3)
    inner = apply_channel(outer * 0.75, L(2) + L(12) + L(4), P.p, 4)
    r1 = op_A(inner, _supply(P.A3, b1, P), 5, bl, P.p, P.theta).renamed("R1")
    r2 = op_F(outer, _supply(P.T3, b1, P), _supply(P.A4, b1, P), 4, bl, P.p, P.theta)
    r2 = r2.renamed("R2")
    xor = r1.with_samples(0.5 * (r1.samples - np.minimum(r1.samples, r2.samples)))
    xor = apply_channel(xor, (L(2) + L(9) + 2 * w) / 2, P.p, 5)
    xor = apply_channel(apply_channel(xor, L(14), P.p, 10), L(4), P.p, 10).renamed("XOR")
    shares = (1 / 11, 10 / 11) if P.flow_weighted_not else None
    not23 = op_R(_supply(P.NOT0, b1, P), xor, 11, bl, P.p, shares=shares)
    not23 = apply_channel(not23, (2 * L(2) + L(18) + h) / 2, P.p, 11).renamed("NOT23")
    not1 = op_G(apply_channel(b1, L(16), P.p, 3), _supply(P.V, b1, P), 4, bl, P.p)
    not1 = apply_channel(not1, (2 * L(2) + 2 * L(17) + L(18) + h) / 2, P.p, 4).renamed("NOT1")
    mix = combine([(4 / 15, not1), (11 / 15, not23)])
    y1 = op_F(_T(mix, P, 15), _supply(P.T4, b1, P), _supply(P.A5, b1, P), 16, bl, P.p,
              P.theta).renamed("Y1")
    return Y1Trace(r1, r2, xor, not23, not1, y1)


def rx_y1(b1, b2, b3, params: RxParams) -> ConcentrationSignal:
    return rx_y1_trace(b1, b2, b3, params).output


def expected_high(camp: float, n: float, blocks: BlockGeometry, p: DispersionParams,
                  grid: Grid) -> float:
    """Plateau of an amplifier stage driven by steady inputs."""
    one = constant(1.0, grid)
    return steady_state(op_A(one, constant(camp, grid), n, blocks, p)).value


def demodulate(y2: ConcentrationSignal, y1: ConcentrationSignal, decision_frac: float = 0.5,
               high2: float | None = None, high1: float | None = None) -> tuple:
    """Bit pair (b2, b1) from the two receiver outputs."""
    if not 0 < decision_frac < 1:
        raise ConfigError("decision_frac must lie in (0, 1)")
    high2 = y2.peak() if high2 is None else high2
    high1 = y1.peak() if high1 is None else high1
    bit = lambda y, hi: int(hi > 0 and y.peak() > decision_frac * hi)
    return bit(y2, high2), bit(y1, high1)


class RxResult(NamedTuple):
    B: tuple
    Y2: ConcentrationSignal
    Y1: ConcentrationSignal
    bits: tuple


def receive(c_o: ConcentrationSignal, params: RxParams) -> RxResult:
    P = params
    b = rx_frontend(c_o, P)
    y2 = rx_y2(b[0], b[1], P)
    y1 = rx_y1(*b, P)
    h2 = expected_high(P.A2, 8, P.blocks, P.p, c_o.grid)
    h1 = expected_high(P.A5, 17, P.blocks, P.p, c_o.grid)
    return RxResult(b, y2, y1, demodulate(y2, y1, P.decision_frac, h2, h1))


def rx_input(level: float, grid: Grid, window=(1.0, 3.0)) -> ConcentrationSignal:
    return generate(rect(level, *window), grid, "O") if level > 0 else zeros(grid, "O")


def end_to_end(bits, tx: TxParams | None = None, rx: RxParams | None = None) -> tuple:
    tx = (tx or TxParams()).with_(bits=tuple(bits))
    rx = rx or RxParams()
    return receive(tx_output(tx), rx).bits


def flow_share_report(params: RxParams) -> list:
    """Compare each receiver junction's dilution factors with flow shares.

    Each entry lists the velocity multipliers of the incoming streams, the
    flow-weighted dilution computed by ``hydraulics.combine_junction`` and the
    factors the receiver equations apply.  Mismatches are reported, not fixed.
    """
    geom = ChannelGeometry(params.width, params.height)
    stages = [
        ("B junction (Y2)", (3, 3), (0.5, 0.5)),
        ("R2 thresholding", (3, 1), (3 / 4, 1 / 4)),
        ("R1 inner dilution by T3", (3, 1), (3 / 4, 1 / 4)),
        ("XOR merge", (5, 5), (0.5, 0.5)),
        ("NOT inversion (NOT0, XOR)", (1, 10),
         (1 / 11, 10 / 11) if params.flow_weighted_not else (10 / 11, 1 / 11)),
        ("B1 + V", (3, 1), (3 / 4, 1 / 4)),
        ("NOT merge", (4, 11), (4 / 15, 11 / 15)),
        ("Y1 thresholding", (15, 1), (15 / 16, 1 / 16)),
    ]
    out = []
    for name, mult, used in stages:
        inlets = tuple((FlowState.from_velocity(m * params.p.v_eff, geom),
                        tuple(np.eye(len(mult))[i])) for i, m in enumerate(mult))
        _, mixed = combine_junction(JunctionSpec(inlets))
        ok = bool(np.allclose(mixed, used, rtol=1e-12))
        out.append({"stage": name, "multipliers": mult, "flow_shares": tuple(float(x) for x in mixed),
                    "applied": used, "consistent": ok})
    return out
