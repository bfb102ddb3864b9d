"""
AND gate
========

Two input pulses overlap on [2, 3] s.  The threshold species ThL decides
whether one input alone is enough to fire the amplifier (OR-like), whether
both are needed (AND), or whether nothing gets through.
"""
from mfmc.circuits import (and_gate, default_and_params, high_interval, is_and,
                           thl_level, thl_window, truth_table)

params = default_and_params(thl=10)
win = thl_window(params)
print("ThL must lie in (%.2f, %.2f)" % win.injected)

for thl in (5, 10, 20):
    P = default_and_params(thl)
    table = truth_table(P)
    print("ThL = %2d  junction level %.2f  peaks %s  AND: %s"
          % (thl, thl_level(P), {k: round(v, 3) for k, v in table.items()},
             is_and(table, P.high_level)))

out = and_gate(params)
print("output HIGH from %.2f to %.2f s" % high_interval(out))
