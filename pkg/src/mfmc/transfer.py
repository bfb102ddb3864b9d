"""Impulse response of a straight convection-diffusion channel.

The channel is described in the frequency domain by

    C(x, w) = exp(v x / 2D - sqrt(x^2 (v^2 + 4 j w D) / 4 D^2))

and the time-domain kernel is recovered with the Gil-Pelaez inversion
formula.  We invert for the distribution function

    F(t) = 1/2 + (1/pi) * int_0^inf Im[exp(j w t) C(x, w)] / w dw

and difference it across grid cells, so each kernel sample is the mean
density over its cell.  That keeps the kernel mass right even when the
response is narrower than the sampling step.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError
from .hydraulics import ChannelGeometry
from .signals import ConcentrationSignal, Grid, convolve

MAG_CUTOFF = 1e-8
QUAD_RTOL = 1e-6
CLIP_FRAC = 1e-2
RAW_MASS_TOL = 1e-2
GL_NODES = 16
MAX_REFINE = 14
REANCHOR = 32
TAIL_MASS = 1e-7


@dataclass(frozen=True)
class DispersionParams:
    D: float
    D_eff: float
    v_eff: float

    def __post_init__(self):
        if not (self.D > 0 and self.D_eff > 0):
            raise ConfigError("diffusion coefficients must be positive")
        if self.D_eff < self.D * (1 - 1e-12):
            raise ConfigError("effective diffusion cannot be below molecular diffusion")
        if not self.v_eff > 0:
            raise ConfigError("average velocity must be positive")

    @classmethod
    def fixed(cls, D_eff: float = 1e-8, v_eff: float = 1e-3) -> "DispersionParams":
        """Dispersion given directly, as in the reference simulations."""
        return cls(D_eff, D_eff, v_eff)

    @classmethod
    def from_geometry(cls, D: float, v_eff: float, geom: ChannelGeometry) -> "DispersionParams":
        return cls(D, taylor_aris(D, v_eff, geom), v_eff)


@dataclass(frozen=True, eq=False)
class TransferKernel:
    dt: float
    samples: np.ndarray = field(repr=False)
    x: float
    multiplier: float
    velocity: float
    D_eff: float
    raw_mass: float = 1.0
    clipped: float = 0.0

    def mass(self) -> float:
        return float(self.dt * self.samples.sum())

    def mean(self) -> float:
        t = self.dt * np.arange(len(self.samples))
        return float(self.dt * np.sum(t * self.samples))

    def variance(self) -> float:
        t = self.dt * np.arange(len(self.samples))
        m = self.mean()
        return float(self.dt * np.sum((t - m) ** 2 * self.samples))


def taylor_aris(D: float, v_eff: float, geom: ChannelGeometry) -> float:
    """Effective axial dispersion in a rectangular channel."""
    if not D > 0:
        raise ConfigError("D must be positive")
    w, h = geom.width, geom.height
    return D * (1 + 8.5 * v_eff**2 * h**2 * w**2 / (210 * D**2 * (h**2 + 2.4 * h * w + w**2)))


def frequency_response(x: float, omega, p: DispersionParams, n: float = 1.0):
    """Channel response at angular frequency omega for mean velocity n * v_eff.

    The square root is the principal branch, so the real part of the
    exponent is never positive.  The exponent is rearranged as
    -2 j w x / (v + sqrt(v^2 + 4 j w D)) to avoid cancellation.
    """
    if x < 0:
        raise ConfigError("x must be non-negative")
    v, D = n * p.v_eff, p.D_eff
    w = np.asarray(omega, dtype=float)
    root = np.sqrt(v * v + 4j * w * D)
    out = np.exp(-2j * w * x / (v + root))
    return out if out.ndim else complex(out)


def tail_bound(x: float, p: DispersionParams, n: float = 1.0, eps: float = TAIL_MASS) -> float:
    """Time after which at most eps of the kernel mass remains.

    Chernoff bound P(T > t) <= M(s) exp(-s t), with the moment generating
    function M(s) = exp(2 s x / (v + sqrt(v^2 - 4 s D))) read off the channel
    response on the real axis, minimised over 0 < s <= v^2 / 4D.
    """
    v, D = n * p.v_eff, p.D_eff
    s = v * v / (4 * D) * np.linspace(0.02, 1.0, 50)
    log_m = 2 * s * x / (v + np.sqrt(np.maximum(v * v - 4 * s * D, 0.0)))
    return float(np.min((log_m - np.log(eps)) / s))


def _omega_max(x, p, n):
    w = 1.0
    while abs(frequency_response(x, w, p, n)) >= MAG_CUTOFF:
        w *= 2.0
        if w > 1e12:
            raise NumericError("frequency response does not decay", x=x)
    return w


def _cdf(t_edges, x, p, n, w_max, n_panels):
    """Gil-Pelaez sum on equally spaced edges.

    The phase factor exp(j w t) is advanced edge to edge by one complex
    multiplication and re-anchored every REANCHOR edges to stop drift.
    """
    nodes, weights = np.polynomial.legendre.leggauss(GL_NODES)
    width = w_max / n_panels
    left = width * np.arange(n_panels)
    om = (left[:, None] + 0.5 * width * (nodes + 1)).ravel()
    wt = np.tile(0.5 * width * weights, n_panels)
    g = wt * frequency_response(x, om, p, n) / om
    dt = t_edges[1] - t_edges[0] if len(t_edges) > 1 else 0.0
    step = np.exp(1j * om * dt)
    out = np.empty(len(t_edges))
    for i, t in enumerate(t_edges):
        if i % REANCHOR == 0:
            z = np.exp(1j * om * t)
        out[i] = np.dot(z.real, g.imag) + np.dot(z.imag, g.real)
        z *= step
    return 0.5 + out / np.pi


def _gil_pelaez_cdf(t_edges, x, p, n):
    w_max = _omega_max(x, p, n)
    t_span = max(abs(t_edges[0]), abs(t_edges[-1]), 1e-12)
    # start with a panel per two oscillations at the latest edge
    n_panels = max(8, int(np.ceil(w_max * t_span / (4 * np.pi))))
    prev = _cdf(t_edges, x, p, n, w_max, n_panels)
    for _ in range(MAX_REFINE):
        n_panels *= 2
        cur = _cdf(t_edges, x, p, n, w_max, n_panels)
        if np.max(np.abs(cur - prev)) < QUAD_RTOL:
            return cur
        prev = cur
    raise NumericError("Gil-Pelaez quadrature did not converge", x=x, n=n,
                       w_max=w_max, panels=n_panels)


_cache: dict = {}
_cache_lock = threading.Lock()


def _key(*vals):
    return tuple(float(f"{v:.12g}") for v in vals)


def clear_cache():
    with _cache_lock:
        _cache.clear()


def cache_size() -> int:
    with _cache_lock:
        return len(_cache)


def kernel(x: float, p: DispersionParams, grid: Grid, n: float = 1.0) -> TransferKernel:
    """Sampled impulse response H_n(x, t) on the grid's time step.

    The kernel is computed up to the point where the remaining mass is
    negligible (or the grid horizon), never longer than the grid.
    """
    if x < 0:
        raise ConfigError("x must be non-negative")
    if not n > 0:
        raise ConfigError("velocity multiplier must be positive")
    dt = grid.dt
    key = _key(x, p.v_eff * n, p.D_eff, dt, grid.n, n)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    k = _compute_kernel(x, p, dt, grid.n, n)
    with _cache_lock:
        # first writer wins so every reader sees the same object
        k = _cache.setdefault(key, k)
    return k


def _compute_kernel(x, p, dt, n_max, n):
    v = n * p.v_eff
    if x == 0:
        return TransferKernel(dt, np.array([1.0 / dt]), 0.0, n, v, p.D_eff)
    length = min(n_max, int(np.ceil(tail_bound(x, p, n, TAIL_MASS) / dt)) + 8)
    while True:
        edges = dt * (np.arange(length + 1) - 0.5)
        F = _gil_pelaez_cdf(edges, x, p, n)
        if 1 - F[-1] < TAIL_MASS or length >= n_max:
            break
        length = min(n_max, 2 * length)
    raw = np.diff(F) / dt
    peak = raw.max()
    neg = raw < 0
    if np.any(raw[neg] < -CLIP_FRAC * peak):
        raise NumericError("kernel has a negative lobe beyond the clipping limit",
                           x=x, n=n, worst=float(raw.min()), peak=float(peak))
    clipped = float(-dt * raw[neg].sum())
    dens = np.where(neg, 0.0, raw)
    raw_mass = float(dt * dens.sum())
    if abs(raw_mass - 1) > RAW_MASS_TOL:
        raise NumericError("kernel mass is off before normalisation",
                           x=x, n=n, raw_mass=raw_mass, horizon=dt * n_max)
    dens = dens / raw_mass
    dens.setflags(write=False)
    return TransferKernel(dt, dens, x, n, v, p.D_eff, raw_mass, clipped)


def apply_channel(f: ConcentrationSignal, x: float, p: DispersionParams,
                  n: float = 1.0) -> ConcentrationSignal:
    """Outlet concentration of a channel of length x fed with f."""
    return convolve(f, kernel(x, p, f.grid, n))
