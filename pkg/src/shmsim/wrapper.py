"""Cycle-true memory wrapper.

The wrapper couples a handshake FSM with a functional core (pointer table plus
translator). A request sampled in IDLE at cycle ``c`` is acknowledged at::

    c + 2 + D + B

where ``B`` is the number of array beats (``dim`` for READ_ARR/WRITE_ARR,
0 otherwise) and ``D = base_delay[opcode] + per_word * B``. The FSM walks
IDLE -> DECODE -> (RECV) -> EXEC -> (SEND) -> ACK -> IDLE; DECODE and ACK cost
one cycle each, EXEC costs ``D`` cycles (possibly none), RECV and SEND one
cycle per beat.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .pointer_table import PointerTable, TableError
from .protocol import (
    WORD_MASK,
    MasterSignals,
    Opcode,
    Request,
    Response,
    SlaveSignals,
    Status,
    beats,
    error_response,
)
from .translator import BackingStore, Endianness

DEFAULT_CAPACITY = 65536


@dataclass
class DelayConfig:
    base: dict[Opcode, int] = field(default_factory=lambda: {op: 0 for op in Opcode})
    per_word: int = 0

    def __post_init__(self):
        self.base = {op: int(self.base.get(op, 0)) for op in Opcode}
        if self.per_word < 0 or any(d < 0 for d in self.base.values()):
            raise ValueError("delays must be non-negative")

    def delay(self, opcode: Opcode, n_beats: int) -> int:
        return self.base[opcode] + self.per_word * n_beats

    def latency(self, opcode: Opcode, dim: int) -> int:
        """Sample-to-ack distance in cycles."""
        b = beats(opcode, dim)
        return 2 + self.delay(opcode, b) + b


class FsmState(enum.Enum):
    IDLE = "IDLE"
    DECODE = "DECODE"
    RECV = "RECV"
    EXEC = "EXEC"
    SEND = "SEND"
    ACK = "ACK"


@dataclass(frozen=True)
class Transaction:
    """One acknowledged transaction, as seen at the wrapper boundary."""

    request: Request
    response: Response
    sample_cycle: int
    ack_cycle: int
    delay: int
    n_beats: int


_QUIET = SlaveSignals()


class Wrapper:
    def __init__(
        self,
        capacity_bytes: int = DEFAULT_CAPACITY,
        endianness: Endianness = Endianness.LITTLE,
        delays: DelayConfig | None = None,
    ):
        self.table = PointerTable(capacity_bytes)
        self.store = BackingStore()
        self.endianness = endianness
        self.delays = delays or DelayConfig()
        self.type_mismatches = 0
        self.high_water = 0
        self.last_txn: Transaction | None = None
        self.reset()

    def reset(self) -> None:
        """Return the FSM to IDLE. Table and store contents are kept."""
        self.state = FsmState.IDLE
        self.latched: Request | None = None
        self.sample_cycle = 0
        self.beat_counter = 0
        self.delay_counter = 0
        self.n_beats = 0
        self.delay = 0
        self.io_array: list[int] = []
        self.pending: Response | None = None
        self.aborted = False

    @property
    def busy(self) -> bool:
        return self.state is not FsmState.IDLE

    # -- cycle-true part -------------------------------------------------

    def tick(self, inp: MasterSignals, cycle: int) -> SlaveSignals:
        st = self.state
        if st is FsmState.IDLE:
            if inp.req and inp.request is not None:
                self.latched = inp.request
                self.sample_cycle = cycle
                self.state = FsmState.DECODE
            return _QUIET

        if st is FsmState.ACK:
            return self._ack(cycle)

        if not inp.req:
            self.aborted = True

        if st is FsmState.DECODE:
            r = self.latched
            self.n_beats = beats(r.opcode, r.dim)
            self.delay = self.delay_counter = self.delays.delay(r.opcode, self.n_beats)
            if r.opcode is Opcode.WRITE_ARR:
                self.state = FsmState.RECV
            else:
                self._enter_exec()
            return _QUIET

        if st is FsmState.RECV:
            self.io_array.append(inp.beat_data & WORD_MASK)
            self.beat_counter += 1
            if self.beat_counter == self.n_beats:
                self.beat_counter = 0
                self._enter_exec()
            return _QUIET

        if st is FsmState.EXEC:
            self.delay_counter -= 1
            if self.delay_counter == 0:
                self._finish_exec()
            return _QUIET

        # SEND
        i = self.beat_counter
        self.beat_counter += 1
        if self.beat_counter == self.n_beats:
            self.state = FsmState.ACK
        if self.pending.status is not Status.OK:
            return _QUIET
        return SlaveSignals(out_valid=True, data_out=self.io_array[i])

    def _enter_exec(self):
        if self.delay_counter == 0:
            self._finish_exec()
        else:
            self.state = FsmState.EXEC

    def _finish_exec(self):
        r = self.latched
        if self.aborted:
            self.pending = error_response(Status.ERR_BADOP)
        else:
            if r.opcode is Opcode.WRITE_ARR:
                r = replace(r, data=tuple(self.io_array))
            self.pending = self.execute(r)
        if r.opcode is Opcode.READ_ARR:
            self.io_array = list(self.pending.data_out)
            self.beat_counter = 0
            self.state = FsmState.SEND
        else:
            self.state = FsmState.ACK

    def _ack(self, cycle):
        resp = self.pending
        if self.aborted:
            resp = error_response(Status.ERR_BADOP)
        resp = replace(resp, completion_cycle=cycle)
        self.last_txn = Transaction(
            self.latched, resp, self.sample_cycle, cycle, self.delay, self.n_beats
        )
        out = SlaveSignals(
            ack=True,
            status=resp.status,
            data_out=resp.data_out[0] if len(resp.data_out) == 1 else 0,
            vptr_out=resp.vptr_out,
            response=resp,
        )
        self.reset()
        return out

    # -- functional part -------------------------------------------------

    def execute(self, r: Request) -> Response:
        """Zero-time functional core. A non-OK response leaves no trace in
        the table or the store."""
        try:
            resp = self._dispatch(r)
        except TableError as exc:
            return error_response(exc.status)
        if self.table.used_bytes > self.high_water:
            self.high_water = self.table.used_bytes
        return resp

    def _dispatch(self, r: Request) -> Response:
        table, store, e = self.table, self.store, self.endianness
        op = r.opcode
        if op is Opcode.ALLOC:
            vptr, _ = table.insert(r.dim, r.elem_type, store)
            return Response(Status.OK, vptr_out=vptr)
        if op is Opcode.FREE:
            table.remove(r.vptr, store, r.pe_id)
            return Response(Status.OK)
        if op is Opcode.RESERVE:
            table.reserve(r.vptr, r.pe_id)
            return Response(Status.OK)
        if op is Opcode.RELEASE:
            table.release(r.vptr, r.pe_id)
            return Response(Status.OK)

        i, off = table.resolve(r.vptr)
        entry = table.entries[i]
        t = entry.elem_type
        if r.elem_type is not t:
            self.type_mismatches += 1
        count = r.dim if op.is_array else 1
        if off + count * t.size > entry.size_bytes:
            raise TableError(Status.ERR_BADPTR, "array runs past the end of its allocation")
        if op.mutates:
            table.check_access(entry, r.pe_id)

        if op is Opcode.READ:
            return Response(Status.OK, data_out=(store.read_elem(entry.buf, off, t, e),))
        if op is Opcode.WRITE:
            store.write_elem(entry.buf, off, r.data[0], t, e)
            return Response(Status.OK)
        if op is Opcode.READ_ARR:
            words = tuple(
                store.read_elem(entry.buf, off + k * t.size, t, e) for k in range(count)
            )
            return Response(Status.OK, data_out=words)
        for k, w in enumerate(r.data):
            store.write_elem(entry.buf, off + k * t.size, w, t, e)
        return Response(Status.OK)
