"""Elementary blocks as signal operators.

Every block is a junction (which dilutes each stream by its share of the
total flow), an optional pointwise reaction and one or two transport
channels.  A multiplier n means the channel carries n * v_eff, i.e. n unit
streams have merged into it.

    T[f, n]          transport over L_T
    G[Ci, Cj, n]     product of Si + Sj -> Sk
    R[Ci, Cj, n]     what is left of Si after Si + Sj -> Sk
    A[Csi, Camp, n]  amplifier: Amp passes where Si is present
    F[Ci, Cj, Camp, n] = A[R[Ci, Cj, n], Camp, n + 1]

In G, R and A the first argument arrives with n - 1 unit streams and the
second with one, so their shares are (n - 1)/n and 1/n.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .hydraulics import ChannelGeometry
from .reactions import DEFAULT_THETA, gate
from .signals import ConcentrationSignal, _same_grid
from .transfer import DispersionParams, apply_channel

WIDTH = 20e-6
HEIGHT = 10e-6


def buffer_length(geom: ChannelGeometry, D: float, v_eff: float) -> float:
    """Shortest buffer over which two side-by-side laminae mix by diffusion."""
    if not D > 0:
        raise ConfigError("D must be positive")
    return (geom.width**2 + geom.height**2) * v_eff / D


@dataclass(frozen=True)
class BlockGeometry:
    L_T: float = 80e-6
    L_C: float = 20e-6
    L_B: float = 50e-6
    L_R: float = 500e-6

    def __post_init__(self):
        if min(self.L_T, self.L_C, self.L_B, self.L_R) < 0:
            raise ConfigError("block lengths must be non-negative")

    def with_(self, **kw) -> "BlockGeometry":
        return replace(self, **kw)

    @classmethod
    def mixed(cls, p: DispersionParams, width: float = WIDTH, height: float = HEIGHT,
              **kw) -> "BlockGeometry":
        """Blocks whose buffer is exactly the mixing length for p."""
        lb = buffer_length(ChannelGeometry(width, height), p.D_eff, p.v_eff)
        return cls(L_B=lb, **kw)


def _shares(n, shares):
    if not n > 1:
        raise ConfigError(f"velocity multiplier must exceed 1 for a two-inlet block, got {n}")
    return shares if shares is not None else ((n - 1) / n, 1 / n)


def _pair(a: ConcentrationSignal, b: ConcentrationSignal):
    if not _same_grid(a.grid, b.grid):
        raise ConfigError("block inputs live on different grids")


def _pre_reaction(f, n, blocks, p):
    return apply_channel(f, n * blocks.L_B + blocks.L_C, p, n)


def op_T(f: ConcentrationSignal, n: float, L_T: float, p: DispersionParams) -> ConcentrationSignal:
    if not n > 0:
        raise ConfigError("velocity multiplier must be positive")
    return apply_channel(f, L_T, p, n)


def _react(ci, cj, n, blocks, p, shares, residual):
    _pair(ci, cj)
    si, sj = _shares(n, shares)
    a = si * ci.samples
    phi = np.minimum(a, sj * cj.samples)
    s = ci.with_samples(a - phi if residual else phi)
    return apply_channel(_pre_reaction(s, n, blocks, p), blocks.L_R, p, n)


def op_G(ci, cj, n, blocks: BlockGeometry, p: DispersionParams, shares=None):
    """Product of the thresholding reaction, transported to the block outlet."""
    return _react(ci, cj, n, blocks, p, shares, residual=False)


def op_R(ci, cj, n, blocks: BlockGeometry, p: DispersionParams, shares=None):
    """Remaining first reactant after the thresholding reaction."""
    return _react(ci, cj, n, blocks, p, shares, residual=True)


def op_A(csi, camp, n, blocks: BlockGeometry, p: DispersionParams,
         theta: float = DEFAULT_THETA, shares=None):
    _pair(csi, camp)
    si, sa = _shares(n, shares)
    amp = _pre_reaction(camp * sa, n, blocks, p)
    sig = _pre_reaction(csi * si, n, blocks, p)
    on = gate(sig, theta)
    return apply_channel(amp.with_samples(np.where(on, amp.samples, 0.0)), blocks.L_R, p, n)


def op_F(ci, cj, camp, n, blocks: BlockGeometry, p: DispersionParams,
         theta: float = DEFAULT_THETA):
    return op_A(op_R(ci, cj, n, blocks, p), camp, n + 1, blocks, p, theta)
