"""Checks run over transaction traces after a simulation."""
from __future__ import annotations

from collections import defaultdict

from .protocol import Opcode, Status
from .wrapper import DelayConfig, Transaction

_SIZES = {"U8": 1, "I8": 1, "U16": 2, "I16": 2, "U32": 4, "I32": 4}


def routed(trace: list[Transaction], n_mems: int) -> list[Transaction]:
    """Transactions that reached a wrapper (drops interconnect rejects)."""
    return [t for t in trace if t.request.sm_addr < n_mems]


def expected_latency(delays: DelayConfig, opcode: Opcode, dim: int) -> int:
    b = dim if opcode in (Opcode.READ_ARR, Opcode.WRITE_ARR) else 0
    return 2 + delays.base[opcode] + delays.per_word * b + b


def timing_violations(trace, delays: DelayConfig, n_mems: int) -> list[Transaction]:
    return [
        t for t in routed(trace, n_mems)
        if t.ack_cycle - t.sample_cycle != expected_latency(delays, t.request.opcode, t.request.dim)
    ]


def overlap_violations(trace, n_mems: int) -> list[tuple[Transaction, Transaction]]:
    """Pairs of transactions whose [sample, ack] windows overlap on one module."""
    per_mem = defaultdict(list)
    for t in routed(trace, n_mems):
        per_mem[t.request.sm_addr].append(t)
    bad = []
    for txns in per_mem.values():
        txns.sort(key=lambda t: t.sample_cycle)
        for a, b in zip(txns, txns[1:]):
            if b.sample_cycle <= a.ack_cycle:
                bad.append((a, b))
    return bad


def in_flight_violations(trace) -> list[tuple[Transaction, Transaction]]:
    """Pairs of transactions from one PE that were outstanding at the same time."""
    per_pe = defaultdict(list)
    for t in trace:
        per_pe[t.request.pe_id].append(t)
    bad = []
    for txns in per_pe.values():
        txns.sort(key=lambda t: t.sample_cycle)
        for a, b in zip(txns, txns[1:]):
            if b.sample_cycle <= a.ack_cycle:
                bad.append((a, b))
    return bad


def reservation_violations(trace, n_mems: int) -> list[Transaction]:
    """Successful WRITE/WRITE_ARR/FREE by a PE other than the entry's holder.

    Replays allocations and reservations from the trace in ack order, so it
    only trusts what went over the bus.
    """
    # per module: vptr -> [end, holder]
    live: dict[int, dict[int, list]] = defaultdict(dict)
    bad = []
    for t in sorted(routed(trace, n_mems), key=lambda t: t.ack_cycle):
        r, resp = t.request, t.response
        allocs = live[r.sm_addr]
        if r.opcode is Opcode.ALLOC:
            if resp.status is Status.OK:
                allocs[resp.vptr_out] = [resp.vptr_out + r.dim * _SIZES[r.elem_type.name], None]
            continue
        if resp.status is not Status.OK:
            continue
        owner = next((v for v, (end, _) in allocs.items() if v <= r.vptr < end), None)
        if owner is None:
            continue
        holder = allocs[owner][1]
        if r.opcode in (Opcode.WRITE, Opcode.WRITE_ARR, Opcode.FREE):
            if holder is not None and holder != r.pe_id:
                bad.append(t)
            if r.opcode is Opcode.FREE:
                del allocs[owner]
        elif r.opcode is Opcode.RESERVE:
            if holder is not None and holder != r.pe_id:
                bad.append(t)
            allocs[owner][1] = r.pe_id
        elif r.opcode is Opcode.RELEASE:
            allocs[owner][1] = None
    return bad
