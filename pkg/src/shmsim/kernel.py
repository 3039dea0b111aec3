"""Cycle-driven simulation kernel.

Each cycle runs four phases in a fixed order, which pins down exact cycle
counts:

1. every processing element steps (consuming last cycle's ack, issuing or
   holding a request),
2. the crossbar arbitrates the requests,
3. every memory wrapper ticks with its channel owner's signals,
4. the crossbar releases the channels acknowledged this cycle.

The run stops once every PE is DONE or FAILED, or after ``max_cycles``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .config import SystemConfig
from .interconnect import Crossbar
from .pe import Phase, ProcessingElement, WorkloadProgram
from .protocol import IDLE_MASTER, Opcode, Status, error_response
from .wrapper import FsmState, Transaction, Wrapper


@dataclass
class Stats:
    cycles_simulated: int = 0
    wall_time_seconds: float = 0.0
    op_counts: dict[Opcode, int] = field(default_factory=lambda: dict.fromkeys(Opcode, 0))
    err_counts: dict[Opcode, int] = field(default_factory=lambda: dict.fromkeys(Opcode, 0))
    status_counts: dict[Status, int] = field(default_factory=lambda: dict.fromkeys(Status, 0))
    high_water: list[int] = field(default_factory=list)
    capacity: list[int] = field(default_factory=list)
    type_mismatches: int = 0
    pe_completion: list[int | None] = field(default_factory=list)
    pe_outcome: list[str] = field(default_factory=list)

    @property
    def transactions(self) -> int:
        return sum(self.op_counts.values())

    @property
    def cycles_per_second(self) -> float:
        if self.wall_time_seconds <= 0:
            return 0.0
        return self.cycles_simulated / self.wall_time_seconds


@dataclass
class PeOutcome:
    pe_id: int
    phase: Phase
    end_cycle: int | None
    reason: str = ""
    line: int = 0
    env: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.phase is Phase.DONE


@dataclass
class RunResult:
    stats: Stats
    outcomes: list[PeOutcome]
    trace: list[Transaction]

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    def failures(self) -> list[PeOutcome]:
        return [o for o in self.outcomes if not o.ok]


class Simulator:
    def __init__(self, config: SystemConfig, programs: list[WorkloadProgram], cycle_log=None):
        if len(programs) != config.n_pes:
            raise ValueError(f"{len(programs)} workloads for {config.n_pes} pes")
        self.config = config
        self.wrappers = [
            Wrapper(cap, endian, config.delays)
            for cap, endian in zip(config.capacity_bytes, config.endianness)
        ]
        self.xbar = Crossbar(config.n_pes, config.n_mems)
        self.pes = [ProcessingElement(i, p) for i, p in enumerate(programs)]
        self.trace: list[Transaction] = []
        # optional list collecting (cycle, mem, fsm state during the cycle, ack, out_valid)
        # for every wrapper with an owner
        self.cycle_log = cycle_log
        self.cycle = 0

    def run(self) -> RunResult:
        start = time.perf_counter()
        self._loop()
        wall = time.perf_counter() - start
        return RunResult(self._stats(wall), self._outcomes(), self.trace)

    def _loop(self):
        pes, wrappers, xbar, trace = self.pes, self.wrappers, self.xbar, self.trace
        owner = xbar.owner
        log = self.cycle_log
        n_pes = len(pes)
        n_mems = len(wrappers)
        idle = FsmState.IDLE
        waiting = Phase.WAITING_GRANT
        cycle = self.cycle
        max_cycles = self.config.max_cycles
        while cycle < max_cycles:
            requests = [None] * n_pes
            live = False
            contend = False
            for pe in pes:
                if pe.finished:
                    continue
                req = pe.step(cycle)
                if not pe.finished:
                    live = True
                    if req is not None and pe.phase is waiting:
                        mem = req.sm_addr
                        requests[pe.pe_id] = mem
                        if mem >= n_mems or owner[mem] is None:
                            contend = True
            if not live:
                cycle += 1
                break

            # arbitration only changes state when some request can be served
            if contend:
                arb = xbar.arbitrate(requests, cycle)
                for pe_id in arb.grants:
                    pes[pe_id].granted(cycle)
                for pe_id in arb.rejected:
                    pe = pes[pe_id]
                    resp = error_response(Status.ERR_BADOP, cycle)
                    pe.reject(resp)
                    trace.append(Transaction(pe.pending, resp, cycle, cycle, 0, 0))

            acked = []
            for m, w in enumerate(wrappers):
                o = owner[m]
                state = w.state
                if o is None:
                    if state is idle:
                        continue
                    sig = w.tick(IDLE_MASTER, cycle)
                else:
                    pe = pes[o]
                    sig = w.tick(pe.drive(cycle), cycle)
                    pe.observe(sig, cycle)
                if log is not None:
                    log.append((cycle, m, state.name, sig.ack, sig.out_valid))
                if sig.ack:
                    acked.append(m)
                    trace.append(w.last_txn)
            if acked:
                xbar.tick(cycle, acked)
            cycle += 1
        self.cycle = cycle

    def _stats(self, wall):
        st = Stats(cycles_simulated=self.cycle, wall_time_seconds=wall)
        for txn in self.trace:
            op = txn.request.opcode
            st.op_counts[op] += 1
            st.status_counts[txn.response.status] += 1
            if txn.response.status is not Status.OK:
                st.err_counts[op] += 1
        st.high_water = [w.high_water for w in self.wrappers]
        st.capacity = [w.table.capacity_bytes for w in self.wrappers]
        st.type_mismatches = sum(w.type_mismatches for w in self.wrappers)
        st.pe_completion = [pe.end_cycle for pe in self.pes]
        st.pe_outcome = [o.phase.name if o.phase in (Phase.DONE, Phase.FAILED) else "TIMEOUT"
                         for o in self.pes]
        return st

    def _outcomes(self):
        out = []
        for pe in self.pes:
            phase = pe.phase
            reason, line = pe.fail_reason, pe.fail_line
            if not pe.finished:
                phase = Phase.FAILED
                reason = f"max_cycles ({self.config.max_cycles}) reached in {pe.phase.name}"
                line = pe.program[pe.pc].line
            out.append(PeOutcome(pe.pe_id, phase, pe.end_cycle, reason, line, dict(pe.env)))
        return out


def run(config: SystemConfig, workloads: list[WorkloadProgram], cycle_log=None) -> RunResult:
    return Simulator(config, workloads, cycle_log).run()
