"""
Cycle-true handshake
====================

Drive one wrapper by hand and watch its FSM. A request sampled at cycle ``c``
is acknowledged at ``c + 2 + D + B``: one DECODE cycle, ``B`` beats for array
transfers, ``D`` delay cycles, one ACK cycle.
"""

from shmsim import DelayConfig, ElemType, Opcode, Request, Wrapper
from shmsim.protocol import IDLE_MASTER, MasterSignals

delays = DelayConfig({Opcode.WRITE_ARR: 2, Opcode.READ_ARR: 1}, per_word=1)
w = Wrapper(delays=delays)
w.execute(Request(0, 0, Opcode.ALLOC, dim=8, elem_type=ElemType.U32))

###############################################################################
# A four-word array write. The master holds ``req`` and drives one word per
# cycle starting two cycles after the sample.

req = Request(0, 0, Opcode.WRITE_ARR, vptr=0, dim=4, elem_type=ElemType.U32,
              data=(0xA, 0xB, 0xC, 0xD))
for cycle in range(20):
    k = cycle - 2
    beat = req.data[k] if 0 <= k < 4 else 0
    state = w.state.name
    sig = w.tick(MasterSignals(True, req, beat), cycle)
    print(f"cycle {cycle:2d}  {state:6s}  beat_in={beat:#x}  ack={int(sig.ack)}")
    if sig.ack:
        break
print("expected ack at", delays.latency(Opcode.WRITE_ARR, 4))

###############################################################################
# Reading it back: the words come out with ``out_valid`` on the cycles just
# before the ack.

req = Request(0, 0, Opcode.READ_ARR, vptr=0, dim=4, elem_type=ElemType.U32)
for cycle in range(100, 120):
    sig = w.tick(MasterSignals(True, req), cycle)
    if sig.out_valid:
        print(f"cycle {cycle}  out {sig.data_out:#x}")
    if sig.ack:
        print(f"cycle {cycle}  ack {sig.status.name}")
        break
w.tick(IDLE_MASTER, cycle + 1)
