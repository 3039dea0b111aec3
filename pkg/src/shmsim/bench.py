"""Simulation-speed overhead of multiple memory modules.

Runs the same synthetic workload on a system where every PE shares one memory
module and on one where each PE owns a module, then compares simulated cycles
per wall-clock second.
"""
from __future__ import annotations

import gc
import random
from dataclasses import dataclass, replace

from .config import SystemConfig
from .kernel import RunResult, run
from .pe import AddrExpr, Instr, WorkloadProgram
from .protocol import ElemType

BUF_WORDS = 64


def bench_workloads(n_pes: int, n_mems: int, ops: int, seed: int) -> list[WorkloadProgram]:
    """One program per PE with ``ops // n_pes`` transactions each.

    Each program allocates a 64-word buffer on module ``pe % n_mems``, mixes
    single writes, reads and 4-word array transfers over it, and frees it.
    Only the module index depends on ``n_mems``, so the transaction mix is
    identical between configurations.
    """
    per_pe = max(ops // n_pes, 2)
    programs = []
    for pe in range(n_pes):
        rng = random.Random(seed * 1_000_003 + pe)
        mem = pe % n_mems
        var = "$buf"
        body = [Instr("alloc", 1, mem=mem, dest=(var,), dim=BUF_WORDS, elem_type=ElemType.U32)]
        for k in range(per_pe - 2):
            u = rng.random()
            line = k + 2
            if u < 0.4:
                off = 4 * rng.randrange(BUF_WORDS)
                body.append(Instr("write", line, mem=mem, addr=AddrExpr(var, off),
                                  values=(rng.getrandbits(32),)))
            elif u < 0.8:
                off = 4 * rng.randrange(BUF_WORDS)
                body.append(Instr("read", line, mem=mem, addr=AddrExpr(var, off), dest=("$r",)))
            elif u < 0.9:
                off = 4 * rng.randrange(BUF_WORDS - 4)
                words = tuple(rng.getrandbits(32) for _ in range(4))
                body.append(Instr("warr", line, mem=mem, addr=AddrExpr(var, off), dim=4,
                                  values=words))
            else:
                off = 4 * rng.randrange(BUF_WORDS - 4)
                body.append(Instr("rarr", line, mem=mem, addr=AddrExpr(var, off), dim=4,
                                  dest=("$a0", "$a1", "$a2", "$a3")))
        body.append(Instr("free", per_pe, mem=mem, addr=AddrExpr(var, 0)))
        body.append(Instr("end", per_pe + 1))
        programs.append(WorkloadProgram(tuple(body)))
    return programs


@dataclass
class BenchRun:
    n_mems: int
    cycles: int
    transactions: int
    wall_time: float
    ok: bool

    @property
    def speed(self) -> float:
        return self.cycles / self.wall_time if self.wall_time > 0 else 0.0


@dataclass
class BenchReport:
    one: BenchRun
    many: BenchRun

    @property
    def degradation_pct(self) -> float:
        return (self.one.speed - self.many.speed) / self.one.speed * 100.0

    def text(self) -> str:
        rows = []
        for label, r in (("1 memory", self.one), (f"{self.many.n_mems} memories", self.many)):
            rows.append(
                f"{label:>12}: cycles={r.cycles} transactions={r.transactions} "
                f"wall={r.wall_time:.3f}s speed={r.speed:.0f} cycles/s"
            )
        rows.append(f"simulation-speed degradation: {self.degradation_pct:.1f}%")
        return "\n".join(rows) + "\n"


def _timed(config: SystemConfig, programs, repeats) -> tuple[RunResult, float]:
    worst = max(config.delays.latency(op, 4) for op in config.delays.base) + 1
    n_txn = sum(p.n_transactions for p in programs)
    bound = n_txn * worst + len(programs) * 8 + 16
    config = replace(config, max_cycles=max(config.max_cycles, bound))
    best = None
    result = None
    for _ in range(repeats):
        # collector pauses land unevenly between runs; keep them out of the timing
        gc.collect()
        gc.disable()
        try:
            result = run(config, programs)
        finally:
            gc.enable()
        wall = result.stats.wall_time_seconds
        best = wall if best is None else min(best, wall)
    return result, best


def bench(config_1mem: SystemConfig, config_4mem: SystemConfig, ops: int, seed: int,
          repeats: int = 1) -> BenchReport:
    """Best-of-``repeats`` wall time per configuration, run sequentially."""
    if config_1mem.n_pes != config_4mem.n_pes:
        raise ValueError("both configurations need the same number of pes")
    runs = []
    for cfg in (config_1mem, config_4mem):
        programs = bench_workloads(cfg.n_pes, cfg.n_mems, ops, seed)
        result, wall = _timed(cfg, programs, repeats)
        runs.append(BenchRun(cfg.n_mems, result.stats.cycles_simulated,
                             result.stats.transactions, wall, result.ok))
    return BenchReport(*runs)
