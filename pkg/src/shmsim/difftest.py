"""Differential fuzzing of the wrapper's functional core against the
reference oracle."""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .oracle import ReferenceOracle
from .protocol import ElemType, Opcode, Request, Status, encode_request
from .translator import Endianness
from .wrapper import Wrapper

DIFF_PES = 4
DIFF_CAPACITY = 4096

_TYPES = list(ElemType)


@dataclass
class Divergence:
    index: int
    request: Request
    expected: tuple
    actual: tuple
    prefix: list[Request]
    reason: str = "response mismatch"


@dataclass
class DiffReport:
    seed: int
    n_ops: int
    capacity: int
    endianness: Endianness
    executed: int = 0
    divergence: Divergence | None = None
    op_counts: Counter = field(default_factory=Counter)
    status_counts: Counter = field(default_factory=Counter)

    @property
    def passed(self) -> bool:
        return self.divergence is None

    def text(self) -> str:
        lines = [
            f"difftest seed={self.seed} ops={self.n_ops} capacity={self.capacity} "
            f"endianness={self.endianness.value}",
            f"executed {self.executed}",
        ]
        lines += [f"op {op.name} {self.op_counts[op]}" for op in Opcode]
        lines += [f"status {s.name} {self.status_counts[s]}" for s in Status]
        d = self.divergence
        if d is None:
            lines.append("PASS")
        else:
            lines += [
                f"FAIL at index {d.index}: {d.reason}",
                "request " + " ".join(f"{w:08x}" for w in encode_request(d.request)),
                f"expected {_fmt(d.expected)}",
                f"actual   {_fmt(d.actual)}",
                f"reproduce: difftest --seed {self.seed} --ops {d.index + 1}",
            ]
        return "\n".join(lines) + "\n"


def _fmt(key):
    status, vptr, data = key
    return f"{Status(status).name} vptr={vptr:#x} data=[{', '.join(f'{w:#x}' for w in data)}]"


class RequestGenerator:
    """Seeded stream of mixed requests for one memory module.

    Roughly one request in ten targets an invalid address and one in ten
    allocation requests asks for a large block, to keep the error paths busy.
    It follows the live allocations through :meth:`observe`.
    """

    def __init__(self, rng: random.Random, capacity: int, n_pes: int = DIFF_PES):
        self.rng = rng
        self.capacity = capacity
        self.n_pes = n_pes
        self.live: list[tuple[int, int, ElemType]] = []
        self.dead: list[int] = []

    def next(self) -> Request:
        rng = self.rng
        pe = rng.randrange(self.n_pes)
        u = rng.random()
        if u < 0.2 or not self.live:
            t = rng.choice(_TYPES)
            if rng.random() < 0.1:
                dim = rng.randint(self.capacity // (4 * t.size), self.capacity // t.size + 1)
            else:
                dim = rng.randint(1, 24)
            return Request(pe, 0, Opcode.ALLOC, 0, max(dim, 1), t)
        if u < 0.38:
            vptr, t = self._addr()
            return Request(pe, 0, Opcode.WRITE, vptr, 0, t, (rng.getrandbits(32),))
        if u < 0.56:
            vptr, t = self._addr()
            return Request(pe, 0, Opcode.READ, vptr, 0, t)
        if u < 0.72:
            op = Opcode.WRITE_ARR if rng.random() < 0.5 else Opcode.READ_ARR
            vptr, t, room = self._array_base()
            if rng.random() < 0.1:
                dim = room + 1
            else:
                dim = rng.randint(1, max(1, min(room, 16)))
            data = tuple(rng.getrandbits(32) for _ in range(dim)) if op is Opcode.WRITE_ARR else ()
            return Request(pe, 0, op, vptr, dim, t, data)
        op = rng.choice((Opcode.FREE, Opcode.FREE, Opcode.RESERVE, Opcode.RELEASE))
        if rng.random() < 0.1:
            vptr, _ = self._addr(force_bad=True)
        else:
            vptr = rng.choice(self.live)[0]
        return Request(pe, 0, op, vptr)

    def observe(self, r: Request, status: Status, vptr_out: int) -> None:
        if status is not Status.OK:
            return
        if r.opcode is Opcode.ALLOC:
            self.live.append((vptr_out, r.dim, r.elem_type))
        elif r.opcode is Opcode.FREE:
            self.live = [a for a in self.live if a[0] != r.vptr]
            self.dead.append(r.vptr)

    def _addr(self, force_bad=False):
        rng = self.rng
        if force_bad or not self.live or rng.random() < 0.1:
            kind = rng.randrange(4)
            t = rng.choice(_TYPES)
            if kind == 0 or not self.live:
                return rng.getrandbits(32), t
            vptr, dim, et = rng.choice(self.live)
            if kind == 1:
                return vptr + dim * et.size, t
            if kind == 2 and et.size > 1:
                return vptr + 1, t
            if self.dead:
                return rng.choice(self.dead), t
            return vptr + dim * et.size + rng.randrange(64), t
        vptr, dim, t = rng.choice(self.live)
        if rng.random() < 0.1:
            t = rng.choice(_TYPES)
            return vptr + rng.randrange(dim) * rng.choice(_TYPES).size, t
        return vptr + rng.randrange(dim) * t.size, t

    def _array_base(self):
        vptr, dim, t = self.rng.choice(self.live)
        k = self.rng.randrange(dim)
        return vptr + k * t.size, t, dim - k


def difftest(seed: int, n_ops: int, capacity: int = DIFF_CAPACITY,
             wrapper_factory=Wrapper) -> DiffReport:
    if n_ops < 1:
        raise ValueError("n_ops must be >= 1")
    rng = random.Random(seed)
    endianness = Endianness.BIG if rng.random() < 0.5 else Endianness.LITTLE
    wrapper = wrapper_factory(capacity, endianness)
    oracle = ReferenceOracle(capacity, endianness.value)
    gen = RequestGenerator(rng, capacity)
    report = DiffReport(seed, n_ops, capacity, endianness)
    requests = []
    frees = 0
    for i in range(n_ops):
        r = gen.next()
        requests.append(r)
        actual = wrapper.execute(r).key()
        expected = oracle.apply(r)
        report.executed = i + 1
        report.op_counts[r.opcode] += 1
        report.status_counts[expected[0]] += 1
        reason = None
        if actual != expected:
            reason = "response mismatch"
        elif len(wrapper.store) != len(wrapper.table):
            reason = f"{len(wrapper.store)} live buffers for {len(wrapper.table)} table entries"
        elif wrapper.table.used_bytes > capacity:
            reason = f"used_bytes {wrapper.table.used_bytes} exceeds capacity"
        if reason:
            report.divergence = Divergence(i, r, expected, actual, requests, reason)
            return report
        if r.opcode is Opcode.FREE and expected[0] is Status.OK:
            frees += 1
        gen.observe(r, expected[0], expected[1])
    if wrapper.store.releases != frees:
        report.divergence = Divergence(
            n_ops - 1, requests[-1], (Status.OK, 0, ()), (Status.OK, 0, ()), requests,
            f"{wrapper.store.releases} host releases for {frees} successful frees",
        )
    return report
