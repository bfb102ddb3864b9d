"""
Four-level link
===============

Two bits pick one of four transmitter units, each amplifying a different
supply, so the channel carries level 0, 1, 2 or 3.  The receiver slices the
level with three thresholds and recombines the slices into two bits.

With the receiver constants as listed, the NOT stage leaves Y1 HIGH for
every input.  Diluting that stage by flow share instead and lowering the
final threshold to 26 recovers the full table.
"""
from mfmc.qcsk import (RxParams, TxParams, end_to_end, flow_share_report, receive,
                       rx_input, sync_report, tx_output)
from mfmc.signals import Grid

grid = Grid()

for bits in [(0, 0), (0, 1), (1, 0), (1, 1)]:
    print("bits", bits, "-> transmitted level %.3f" % tx_output(TxParams(bits=bits)).peak())

rep = sync_report(RxParams(), grid)
print("NOT streams arrive at %.3f s and %.3f s (rise %.3f s)"
      % (rep["delay_not23"], rep["delay_not1"], rep["rise"]))

for row in flow_share_report(RxParams()):
    if not row["consistent"]:
        print("stage %r applies %s, flow gives %s"
              % (row["stage"], tuple(round(x, 3) for x in row["applied"]),
                 tuple(round(x, 3) for x in row["flow_shares"])))

literal = RxParams()
flow = RxParams(flow_weighted_not=True, T4=26.0)
for level in range(4):
    a = receive(rx_input(level, grid), literal).bits
    b = receive(rx_input(level, grid), flow).bits
    print("level %d  literal %s  flow-weighted %s" % (level, a, b))

for bits in [(0, 0), (0, 1), (1, 0), (1, 1)]:
    print("loopback", bits, "->", end_to_end(bits, rx=flow))
