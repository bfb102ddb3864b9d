"""Finite-difference reference solver for the 1D channel equations.

    dC/dt = D d2C/dx2 - v dC/dx  (- k Ci Cj for reacting species)

Explicit first-order upwind convection and central diffusion on a uniform
mesh.  The inlet is a Dirichlet boundary fed by the input signal; the far end
has zero gradient and sits at three times the channel length so it barely
disturbs the outlet trace at x = L.  Reactions are added by Strang splitting
with a second-order Runge-Kutta step.

Nothing here uses the transfer-function machinery, so it can serve as an
independent check of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, GridError
from .signals import ConcentrationSignal, Grid, _same_grid
from .transfer import DispersionParams

CFL_MAX = 0.9
DIFF_MAX = 0.45


@dataclass(frozen=True)
class FdConfig:
    dx: float = 1e-6
    dt: float | None = None  # None: largest stable step that divides the signal step
    scheme: str = "explicit-upwind"  # or "strang-split" (used when reacting)
    domain_factor: float = 3.0

    def __post_init__(self):
        if not self.dx > 0:
            raise ConfigError("dx must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.scheme not in ("explicit-upwind", "strang-split"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.domain_factor < 1:
            raise ConfigError("domain must reach at least the outlet")

    def refined(self, factor: float = 2.0) -> "FdConfig":
        dt = None if self.dt is None else self.dt / factor
        return FdConfig(self.dx / factor, dt, self.scheme, self.domain_factor)


def _substeps(grid_dt, v, D, cfg: FdConfig, k_bound=None):
    """Number of solver steps per signal step, checked against stability."""
    if cfg.dt is not None:
        ratio = grid_dt / cfg.dt
        n_sub = int(round(ratio))
        if n_sub < 1 or abs(ratio - n_sub) > 1e-9 * ratio:
            raise ConfigError("solver dt must divide the signal step")
    else:
        limit = min(CFL_MAX * cfg.dx / v, DIFF_MAX * cfg.dx**2 / D,
                    1.0 / (v / cfg.dx + 2 * D / cfg.dx**2))
        if k_bound:
            limit = min(limit, 0.1 / k_bound)
        n_sub = int(math.ceil(grid_dt / limit - 1e-12))
    dt = grid_dt / n_sub
    cfl, dn = v * dt / cfg.dx, D * dt / cfg.dx**2
    if cfl > CFL_MAX + 1e-12:
        raise ConfigError(f"CFL number {cfl:.3g} exceeds {CFL_MAX}")
    if dn > DIFF_MAX + 1e-12:
        raise ConfigError(f"diffusion number {dn:.3g} exceeds {DIFF_MAX}")
    if cfl + 2 * dn > 1 + 1e-12:
        raise ConfigError("upwind scheme would lose positivity (CFL + 2 * diffusion > 1)")
    if k_bound and dt > 0.1 / k_bound * (1 + 1e-12):
        raise ConfigError("reaction too stiff for the solver step")
    return n_sub, dt


def _mesh(L, cfg: FdConfig):
    if not L > 0:
        raise ConfigError("channel length must be positive")
    n_out = int(round(L / cfg.dx))
    if abs(n_out * cfg.dx - L) > 1e-6 * L:
        raise ConfigError("dx must divide the channel length")
    return n_out, int(round(cfg.domain_factor * n_out))


def _transport_coeffs(v, D, dt, dx):
    c, d = v * dt / dx, D * dt / dx**2
    # new[i] = a u[i-1] + b u[i] + e u[i+1]
    return c + d, 1 - c - 2 * d, d


def _transport(u, coeffs, inflow):
    a, b, e = coeffs
    new = np.empty_like(u)
    new[..., 1:-1] = a * u[..., :-2] + b * u[..., 1:-1] + e * u[..., 2:]
    new[..., 0] = inflow
    new[..., -1] = new[..., -2]
    return new


def fd_convection_diffusion(inp: ConcentrationSignal, L: float, p: DispersionParams,
                            cfg: FdConfig = FdConfig(), n: float = 1.0) -> ConcentrationSignal:
    """Outlet concentration at x = L for a channel fed with inp."""
    v, D = n * p.v_eff, p.D_eff
    n_out, n_cells = _mesh(L, cfg)
    n_sub, dt = _substeps(inp.grid.dt, v, D, cfg)
    coeffs = _transport_coeffs(v, D, dt, cfg.dx)
    u = np.zeros(n_cells + 1)
    src = inp.samples
    out = np.empty(inp.grid.n)
    out[0] = 0.0
    for m in range(1, inp.grid.n):
        # inlet held at the nearest signal sample
        for s in range(n_sub):
            j = m - 1 if (s + 0.5) < 0.5 * n_sub else m
            u = _transport(u, coeffs, src[j])
        out[m] = u[n_out]
    return inp.with_samples(out).renamed(f"{inp.name}_fd" if inp.name else "fd")


def _react_rk2(ci, cj, ck, k, h):
    def rate(a, b):
        return k * a * b
    r1 = rate(ci, cj)
    ai, aj = ci - 0.5 * h * r1, cj - 0.5 * h * r1
    r2 = rate(ai, aj)
    return ci - h * r2, cj - h * r2, ck + h * r2


def fd_reaction(ci0: ConcentrationSignal, cj0: ConcentrationSignal, L: float,
                p: DispersionParams, k: float, cfg: FdConfig = FdConfig(scheme="strang-split"),
                n: float = 1.0):
    """Outlet (Ci, Cj, Ck) of a channel where Si + Sj -> Sk at rate k.

    Both reactants enter mixed at the inlet; Sk enters at zero.  Each step is
    half a reaction step, a transport step, and another half reaction step.
    """
    if not _same_grid(ci0.grid, cj0.grid):
        raise GridError("reactant signals live on different grids")
    if not (k >= 0 and math.isfinite(k)):
        raise ConfigError("fd_reaction needs a finite non-negative rate")
    v, D = n * p.v_eff, p.D_eff
    n_out, n_cells = _mesh(L, cfg)
    cmax = max(ci0.peak(), cj0.peak(), 1e-300)
    n_sub, dt = _substeps(ci0.grid.dt, v, D, cfg, k * cmax if k > 0 else None)
    coeffs = _transport_coeffs(v, D, dt, cfg.dx)
    u = np.zeros((3, n_cells + 1))
    si, sj = ci0.samples, cj0.samples
    out = np.zeros((3, ci0.grid.n))
    for m in range(1, ci0.grid.n):
        # adjacent half reaction steps are fused within a signal interval
        if k > 0:
            u[0], u[1], u[2] = _react_rk2(u[0], u[1], u[2], k, 0.5 * dt)
        for s in range(n_sub):
            j = m - 1 if (s + 0.5) < 0.5 * n_sub else m
            u = _transport(u, coeffs, np.array([si[j], sj[j], 0.0]))
            if k > 0:
                h = dt if s < n_sub - 1 else 0.5 * dt
                u[0], u[1], u[2] = _react_rk2(u[0], u[1], u[2], k, h)
        out[:, m] = u[:, n_out]
    return (ci0.with_samples(out[0]).renamed("Ci_fd"), cj0.with_samples(out[1]).renamed("Cj_fd"),
            ci0.with_samples(out[2]).renamed("Ck_fd"))


def space_time_csv(inp: ConcentrationSignal, L: float, p: DispersionParams, path,
                   cfg: FdConfig = FdConfig(), n: float = 1.0, every: int = 10):
    """Dump the full field (columns x,t,C) every ``every`` signal steps."""
    v, D = n * p.v_eff, p.D_eff
    n_out, n_cells = _mesh(L, cfg)
    n_sub, dt = _substeps(inp.grid.dt, v, D, cfg)
    coeffs = _transport_coeffs(v, D, dt, cfg.dx)
    x = cfg.dx * np.arange(n_cells + 1)
    u = np.zeros(n_cells + 1)
    with open(path, "w") as fh:
        fh.write("x,t,C\n")
        for m in range(inp.grid.n):
            if m:
                for s in range(n_sub):
                    j = m - 1 if (s + 0.5) < 0.5 * n_sub else m
                    u = _transport(u, coeffs, inp.samples[j])
            if m % every == 0:
                t = inp.grid.t0 + m * inp.grid.dt
                for xi, ci in zip(x, u):
                    fh.write(f"{xi!r},{t!r},{float(ci)!r}\n")


class ErrorReport(NamedTuple):
    max_error: float  # peak-normalised
    l2_error: float  # relative
    delay: float  # seconds b lags a (positive: b later)


def compare(a: ConcentrationSignal, b: ConcentrationSignal) -> ErrorReport:
    """Differences between two signals on a common grid.

    If the grids differ, b is linearly interpolated onto a's sample times.
    """
    if _same_grid(a.grid, b.grid):
        ys = b.samples
    else:
        ys = np.interp(a.t, b.t, b.samples, left=0.0, right=0.0)
    xs = a.samples
    scale = max(np.abs(xs).max(initial=0.0), np.abs(ys).max(initial=0.0))
    diff = ys - xs
    if scale == 0:
        return ErrorReport(0.0, 0.0, 0.0)
    max_err = float(np.abs(diff).max() / scale)
    norm = math.sqrt(float(np.sum(xs * xs)))
    l2 = float(math.sqrt(float(np.sum(diff * diff))) / norm) if norm > 0 else math.inf
    corr = np.correlate(ys, xs, mode="full")
    lag = int(np.argmax(corr)) - (len(xs) - 1)
    return ErrorReport(max_err, l2, lag * a.grid.dt)


def outlet_mass_balance(inp: ConcentrationSignal, out: ConcentrationSignal) -> float:
    """Relative difference between outflow and inflow mass (same flow rate)."""
    m_in = inp.mass()
    return abs(out.mass() - m_in) / m_in if m_in > 0 else abs(out.mass())


def observed_order(inp: ConcentrationSignal, L: float, p: DispersionParams,
                   cfg: FdConfig = FdConfig(), n: float = 1.0) -> float:
    """Convergence order from three successively halved meshes."""
    coarse = fd_convection_diffusion(inp, L, p, cfg, n)
    mid = fd_convection_diffusion(inp, L, p, cfg.refined(), n)
    fine = fd_convection_diffusion(inp, L, p, cfg.refined(4.0), n)
    e1 = np.linalg.norm(coarse.samples - mid.samples)
    e2 = np.linalg.norm(mid.samples - fine.samples)
    return float(np.log2(e1 / e2))
