"""
Reactions inside a channel
==========================

Thresholding: Si + Sj -> Sk removes up to Cj of Si.  Amplifying:
Si + Amp -> Si + O turns any trace of Si into O at the Amp supply level.
"""
import math

import numpy as np

from mfmc.reactions import (INF, algorithm1, amplifying_channel, consumed_closed_form,
                            remaining_infinite_rate, thresholding_channel)
from mfmc.signals import Grid, PulseSpec, constant, generate, rect, step
from mfmc.transfer import DispersionParams

grid = Grid.span(6.0, 1e-3)
p = DispersionParams.fixed()

# a Gaussian burst of Si against a steady Sj background
si = generate(PulseSpec("gaussian", 3 / math.sqrt(0.5 * math.pi), centre=2.0, width=0.5), grid)
sj = generate(step(1.3), grid)

# how far a well-mixed pair gets in one time step
print("consumed in 1 ms at k=400:", consumed_closed_form(2.0, 1.3, 400.0, 1e-3))

# finite rates approach the instantaneous limit as k grows
ref = remaining_infinite_rate(si, sj)[0]
for k in (400.0, 4e3, 4e4, 1e6, INF):
    left = algorithm1(si, sj, k)[0]
    print("k = %8g  max deviation %.2e" % (k, np.abs(left.samples - ref.samples).max()))

# what leaves a 500 um channel
ci, cj, ck = thresholding_channel(si, sj, 500e-6, p)
print("Si left %.3f, product %.3f" % (ci.peak(), ck.peak()))

# the amplifier copies Amp wherever Si is present
amp = amplifying_channel(generate(rect(1.0, 1.0, 3.0), grid), constant(3.0, grid), 500e-6, p)
print("amplified plateau %.3f" % amp.samples[int(2.5 / grid.dt)])
