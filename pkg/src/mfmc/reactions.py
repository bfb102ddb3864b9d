"""Reaction step of the split convection-diffusion-reaction model.

Two reactions are modelled.  The thresholding reaction Si + Sj -> Sk
removes equal amounts of both reactants, so in the fast limit it leaves the
excess of one over the other.  The amplifying reaction Si + Amp -> Si + O
turns the Amp supply into O wherever Si is present.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GridError
from .signals import ConcentrationSignal, _same_grid
from .transfer import DispersionParams, apply_channel

INF = math.inf
DEGENERATE_RTOL = 1e-9
GATE_FLOOR = 1e-9  # mol/m^3; below this a stream counts as absent
DEFAULT_THETA = 1.0 / 8.0


@dataclass(frozen=True)
class ReactionSpec:
    kind: str  # "thresholding" | "amplifying"
    rate: float = INF
    species: tuple = ("Si", "Sj", "Sk")

    def __post_init__(self):
        if self.kind not in ("thresholding", "amplifying"):
            raise ConfigError(f"unknown reaction kind {self.kind!r}")
        if not self.rate > 0:
            raise ConfigError("rate constant must be positive")
        if len(set(self.species)) != len(self.species):
            raise ConfigError("species roles must be distinct")


def consumed_closed_form(ci0, cj0, k: float, t):
    """Concentration consumed after time t in a batch of Si + Sj at rate k.

    Written as  a b X / (|b - a| + a X)  with  X = 1 - exp(-|b - a| k t),
    which is the integrated second-order rate law rearranged so that no
    exponential can overflow.  Equal starting concentrations use the
    limiting form c0^2 k t / (1 + c0 k t).
    """
    ci0, cj0, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (ci0, cj0, t)))
    if np.any(ci0 < 0) or np.any(cj0 < 0) or np.any(t < 0):
        raise ConfigError("concentrations and time must be non-negative")
    if not k > 0:
        raise ConfigError("rate constant must be positive")
    a = np.minimum(ci0, cj0)
    b = np.maximum(ci0, cj0)
    if math.isinf(k):
        out = np.where(t > 0, a, 0.0)
        return out if out.ndim else float(out)
    gap = b - a
    degenerate = gap < DEGENERATE_RTOL * b
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        x = -np.expm1(-gap * k * t)
        c = a * b * x / (gap + a * x)
        akt = a * k * t
        c_eq = a * akt / (1 + akt)
    out = np.where(degenerate, c_eq, c)
    out = np.where(a > 0, out, 0.0)
    out = np.clip(out, 0.0, a)
    return out if out.ndim else float(out)


def _check_pair(a: ConcentrationSignal, b: ConcentrationSignal):
    if not _same_grid(a.grid, b.grid):
        raise GridError("reactant signals live on different grids")


def remaining_infinite_rate(ci0: ConcentrationSignal, cj0: ConcentrationSignal):
    """Pointwise complete reaction: returns (Ci_r, Cj_r, consumed)."""
    _check_pair(ci0, cj0)
    phi = np.minimum(ci0.samples, cj0.samples)
    return (ci0.with_samples(ci0.samples - phi), cj0.with_samples(cj0.samples - phi),
            ci0.with_samples(phi).renamed("consumed"))


def algorithm1(ci0: ConcentrationSignal, cj0: ConcentrationSignal, k: float,
               dt: float | None = None, T: float | None = None):
    """Step-by-step batch reaction of continuously injected reactants.

    Each grid interval is treated as a batch: the reactor holds the fresh
    injection plus whatever reacting pair was left unconsumed by the previous
    batch, and reacts for dt.  The unreacted excess of the more abundant
    species is carried off by the flow; only the matched part that had not
    reacted yet is carried into the next interval.  Remaining concentrations
    are reported at the start of their interval.  Returns (Ci_r, Cj_r,
    consumed); samples after T are zero.
    """
    _check_pair(ci0, cj0)
    grid = ci0.grid
    if dt is None:
        dt = grid.dt
    if not np.isclose(dt, grid.dt, rtol=1e-12, atol=0):
        raise GridError("algorithm1 works on the signal grid step")
    n_steps = grid.n if T is None else min(grid.n, int(math.floor(T / dt + 1e-9)) + 1)
    ai, aj = ci0.samples, cj0.samples
    ri, rj, cons = np.zeros(grid.n), np.zeros(grid.n), np.zeros(grid.n)
    carry = 0.0
    for m in range(n_steps):
        ci, cj = carry + ai[m], carry + aj[m]
        c = consumed_closed_form(ci, cj, k, dt)
        ri[m], rj[m], cons[m] = ci - c, cj - c, c
        carry = min(ci, cj) - c
    return (ci0.with_samples(ri), cj0.with_samples(rj),
            ci0.with_samples(cons).renamed("consumed"))


def gate(f: ConcentrationSignal, theta: float = DEFAULT_THETA) -> np.ndarray:
    """Boolean mask where f exceeds theta times its own maximum."""
    if not 0 <= theta < 1:
        raise ConfigError("theta must lie in [0, 1)")
    s = f.samples
    top = s.max(initial=0.0)
    if top <= GATE_FLOOR:
        return np.zeros(s.shape, dtype=bool)
    return s > max(theta * top, 0.0)


def thresholding_channel(ci0: ConcentrationSignal, cj0: ConcentrationSignal, x: float,
                         p: DispersionParams, k: float = INF, n: float = 1.0):
    """Outlet (Ci, Cj, Ck) of a reaction channel of length x."""
    if not x > 0:
        raise ConfigError("channel length must be positive")
    if math.isinf(k):
        ri, rj, phi = remaining_infinite_rate(ci0, cj0)
    else:
        ri, rj, phi = algorithm1(ci0, cj0, k)
    return (apply_channel(ri, x, p, n), apply_channel(rj, x, p, n),
            apply_channel(phi, x, p, n).renamed("product"))


def amplifying_channel(csi0: ConcentrationSignal, camp0: ConcentrationSignal, x: float,
                       p: DispersionParams, theta: float = DEFAULT_THETA,
                       n: float = 1.0) -> ConcentrationSignal:
    """Outlet O of a channel where Si catalyses Amp -> O."""
    _check_pair(csi0, camp0)
    on = gate(csi0, theta)
    return apply_channel(camp0.with_samples(np.where(on, camp0.samples, 0.0)), x, p, n)
