"""
Convection-diffusion channel
============================

A rectangular pulse pushed through a straight 500 um channel, computed two
ways: convolution with the channel's impulse response, and a brute-force
finite-difference solve of the same PDE.
"""
import numpy as np

from mfmc.oracle import FdConfig, compare, fd_convection_diffusion
from mfmc.signals import Grid, generate, rect
from mfmc.transfer import DispersionParams, apply_channel, kernel

grid = Grid.span(8.0)  # 0..8 s, dt = 5 ms
p = DispersionParams.fixed(D_eff=1e-8, v_eff=1e-3)

# the impulse response: unit mass, centred on the mean transit time L/v
h = kernel(500e-6, p, grid)
print("kernel mass", h.mass(), "mean", h.mean(), "expected", 500e-6 / p.v_eff)

src = generate(rect(8.0, 1.0, 3.0), grid, "input")
out = apply_channel(src, 500e-6, p)
print("outlet peak %.3f at t = %.2f s" % (out.peak(), out.t[np.argmax(out.samples)]))

# same thing with finite differences on a 1 um mesh
fd = fd_convection_diffusion(src, 500e-6, p, FdConfig(dx=1e-6))
rep = compare(out, fd)
print("max error %.4f, l2 %.4f, lag %.3f s" % rep)

# shorter channels disperse less; edges stay sharper
for L in (100e-6, 500e-6, 2000e-6):
    y = apply_channel(src, L, p)
    rise = np.argmax(y.samples > 0.9 * 8.0) - np.argmax(y.samples > 0.1 * 8.0)
    print("L = %5.0f um  10-90%% rise %.3f s" % (L * 1e6, rise * grid.dt))

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    plt.plot(src.t, src.samples, label="input")
    plt.plot(out.t, out.samples, label="transfer function")
    plt.plot(fd.t, fd.samples, "--", label="finite differences")
    plt.xlabel("t (s)")
    plt.ylabel("C (mol/m$^3$)")
    plt.legend()
    plt.savefig("channel_transfer.png", dpi=120)
