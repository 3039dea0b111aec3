"""Scripted processing elements.

A workload is a straight-line program, one instruction per line::

    alloc   $var  memN  dim  type          # type: u8 i8 u16 i16 u32 i32
    write   memN  addr  value
    read    $var  memN  addr
    warr    memN  addr  w0 w1 ...
    rarr    $v0 $v1 ...  memN  addr  count
    free    memN  addr
    reserve memN  addr
    release memN  addr
    assert  $var  value
    wait    cycles
    end

``addr`` is ``$var``, ``$var+offset`` (byte offset) or a plain literal address.
Any memory instruction may end with ``expect <STATUS>`` (e.g. ``expect
err_oom``) to make that status the required outcome instead of OK, or with
``expect any`` to accept every outcome. Mnemonics
and status names are case-insensitive, ``#`` starts a comment and integers may
be written in hex with ``0x``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .protocol import (
    WORD_MASK,
    ElemType,
    MasterSignals,
    Opcode,
    Request,
    Response,
    SlaveSignals,
    Status,
)

_MEM_OPS = {
    "alloc": Opcode.ALLOC,
    "write": Opcode.WRITE,
    "read": Opcode.READ,
    "warr": Opcode.WRITE_ARR,
    "rarr": Opcode.READ_ARR,
    "free": Opcode.FREE,
    "reserve": Opcode.RESERVE,
    "release": Opcode.RELEASE,
}
_VAR = re.compile(r"\$[A-Za-z_]\w*\Z")
_MEM = re.compile(r"mem(\d+)\Z", re.IGNORECASE)
_ADDR = re.compile(r"(\$[A-Za-z_]\w*)(?:\+(\w+))?\Z")

# ``expect any``: accept whatever status comes back
ANY_STATUS = "ANY"


class WorkloadSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class AddrExpr:
    var: str | None
    offset: int = 0

    def eval(self, env: dict[str, int]) -> int:
        base = env[self.var] if self.var else 0
        return (base + self.offset) & WORD_MASK

    def __str__(self):
        if self.var is None:
            return hex(self.offset)
        return f"{self.var}+{self.offset}" if self.offset else self.var


@dataclass(frozen=True)
class Instr:
    kind: str
    line: int
    mem: int = 0
    addr: AddrExpr | None = None
    dest: tuple[str, ...] = ()
    dim: int = 0
    elem_type: ElemType = ElemType.U32
    values: tuple[int, ...] = ()
    expect: Status | str | None = None

    @property
    def opcode(self) -> Opcode | None:
        return _MEM_OPS.get(self.kind)


@dataclass(frozen=True)
class WorkloadProgram:
    instrs: tuple[Instr, ...]

    def __len__(self):
        return len(self.instrs)

    def __getitem__(self, i):
        return self.instrs[i]

    @property
    def n_transactions(self) -> int:
        return sum(1 for ins in self.instrs if ins.opcode is not None)


class _Line:
    """Tokens of one source line with their 1-based columns."""

    def __init__(self, text, lineno):
        self.lineno = lineno
        self.toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]

    def err(self, msg, i=None):
        col = self.toks[i][1] if i is not None and i < len(self.toks) else 1
        return WorkloadSyntaxError(msg, self.lineno, col)


def _int(line, i, lo=None):
    tok = line.toks[i][0]
    try:
        v = int(tok, 0)
    except ValueError:
        raise line.err(f"expected an integer, got {tok!r}", i) from None
    if lo is not None and v < lo:
        raise line.err(f"value must be >= {lo}", i)
    return v


def _word(line, i):
    v = _int(line, i)
    if not -(1 << 31) <= v <= WORD_MASK:
        raise line.err("value does not fit in 32 bits", i)
    return v & WORD_MASK


def _mem(line, i):
    m = _MEM.match(line.toks[i][0])
    if not m:
        raise line.err(f"expected memN, got {line.toks[i][0]!r}", i)
    return int(m.group(1))


def _var(line, i, defined):
    tok = line.toks[i][0]
    if not _VAR.match(tok):
        raise line.err(f"expected $variable, got {tok!r}", i)
    if defined is not None and tok not in defined:
        raise line.err(f"undefined variable {tok}", i)
    return tok


def _addr(line, i, defined):
    tok = line.toks[i][0]
    m = _ADDR.match(tok)
    if not m:
        return AddrExpr(None, _word(line, i))
    var, off = m.groups()
    if var not in defined:
        raise line.err(f"undefined variable {var}", i)
    if off is None:
        return AddrExpr(var, 0)
    try:
        return AddrExpr(var, int(off, 0))
    except ValueError:
        raise line.err(f"bad offset {off!r}", i) from None


def _arity(line, n, at_least=False):
    got = len(line.toks) - 1
    if got < n or (got != n and not at_least):
        raise line.err(f"{line.toks[0][0].lower()} takes {n}{'+' if at_least else ''} operands, got {got}")


def parse_workload(text: str) -> WorkloadProgram:
    instrs = []
    defined: set[str] = set()
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _Line(raw.split("#", 1)[0], lineno)
        if not line.toks:
            continue
        if ended:
            raise line.err("instruction after end", 0)
        kind = line.toks[0][0].lower()

        expect = None
        if len(line.toks) >= 3 and line.toks[-2][0].lower() == "expect":
            if kind not in _MEM_OPS:
                raise line.err("expect only applies to memory instructions", len(line.toks) - 2)
            name = line.toks[-1][0].upper()
            if name == "ANY":
                expect = ANY_STATUS
            elif name in Status.__members__:
                expect = Status[name]
            else:
                raise line.err(f"unknown status {line.toks[-1][0]!r}", len(line.toks) - 1)
            line.toks = line.toks[:-2]

        if kind == "alloc":
            _arity(line, 4)
            dest = _var(line, 1, None)
            try:
                t = ElemType.from_name(line.toks[4][0])
            except KeyError:
                raise line.err(f"unknown type {line.toks[4][0]!r}", 4) from None
            ins = Instr(kind, lineno, mem=_mem(line, 2), dest=(dest,),
                        dim=_int(line, 3, lo=1), elem_type=t, expect=expect)
            defined.add(dest)
        elif kind == "write":
            _arity(line, 3)
            ins = Instr(kind, lineno, mem=_mem(line, 1), addr=_addr(line, 2, defined),
                        values=(_word(line, 3),), expect=expect)
        elif kind == "read":
            _arity(line, 3)
            dest = _var(line, 1, None)
            ins = Instr(kind, lineno, mem=_mem(line, 2), addr=_addr(line, 3, defined),
                        dest=(dest,), expect=expect)
            defined.add(dest)
        elif kind == "warr":
            _arity(line, 3, at_least=True)
            words = tuple(_word(line, i) for i in range(3, len(line.toks)))
            ins = Instr(kind, lineno, mem=_mem(line, 1), addr=_addr(line, 2, defined),
                        dim=len(words), values=words, expect=expect)
        elif kind == "rarr":
            _arity(line, 4, at_least=True)
            n_vars = len(line.toks) - 4
            dests = tuple(_var(line, i, None) for i in range(1, 1 + n_vars))
            mem = _mem(line, 1 + n_vars)
            addr = _addr(line, 2 + n_vars, defined)
            count = _int(line, 3 + n_vars, lo=1)
            if count != n_vars:
                raise line.err(f"rarr count {count} does not match {n_vars} variables", 3 + n_vars)
            ins = Instr(kind, lineno, mem=mem, addr=addr, dest=dests, dim=count, expect=expect)
            defined.update(dests)
        elif kind in ("free", "reserve", "release"):
            _arity(line, 2)
            ins = Instr(kind, lineno, mem=_mem(line, 1), addr=_addr(line, 2, defined),
                        expect=expect)
        elif kind == "assert":
            _arity(line, 2)
            ins = Instr(kind, lineno, dest=(_var(line, 1, defined),), values=(_word(line, 2),))
        elif kind == "wait":
            _arity(line, 1)
            ins = Instr(kind, lineno, dim=_int(line, 1, lo=0))
        elif kind == "end":
            _arity(line, 0)
            ins = Instr(kind, lineno)
            ended = True
        else:
            raise line.err(f"unknown mnemonic {line.toks[0][0]!r}", 0)
        instrs.append(ins)
    if not ended:
        raise WorkloadSyntaxError("program does not end with 'end'", max(1, len(text.splitlines())))
    return WorkloadProgram(tuple(instrs))


class Phase(enum.Enum):
    READY = "READY"
    WAITING_GRANT = "WAITING_GRANT"
    IN_FLIGHT = "IN_FLIGHT"
    SLEEPING = "SLEEPING"
    DONE = "DONE"
    FAILED = "FAILED"


class ProcessingElement:
    """Master side of the handshake, driven by a workload program.

    Per cycle the kernel calls :meth:`step` (which returns the request the PE
    wants arbitrated, if any), then :meth:`granted` for winners, then
    :meth:`drive` while the wrapper ticks, then :meth:`observe` with the
    wrapper's outputs. Acknowledgements are consumed on the following
    :meth:`step`.
    """

    def __init__(self, pe_id: int, program: WorkloadProgram):
        self.pe_id = pe_id
        self.program = program
        self.pc = 0
        self.env: dict[str, int] = {}
        self.var_types: dict[str, ElemType] = {}
        self.phase = Phase.READY
        # True once DONE or FAILED
        self.finished = False
        self.wake_cycle = 0
        self.pending: Request | None = None
        self.grant_cycle = 0
        self.completion: Response | None = None
        self.fail_reason = ""
        self.fail_line = 0
        self.end_cycle: int | None = None
        self._beats: list[int] = []
        self._signals: MasterSignals | None = None

    def step(self, cycle: int) -> Request | None:
        phase = self.phase
        if phase is Phase.WAITING_GRANT:
            return self.pending
        if phase is Phase.IN_FLIGHT:
            if self.completion is None:
                return None
            self._complete(self.completion, cycle)
            if self.finished:
                return None
        elif phase is Phase.SLEEPING:
            if cycle < self.wake_cycle:
                return None
            self.phase = Phase.READY
        elif phase is not Phase.READY:
            return None
        return self._run(cycle)

    def granted(self, cycle: int) -> None:
        self.phase = Phase.IN_FLIGHT
        self.grant_cycle = cycle
        self._beats = []
        self._signals = MasterSignals(True, self.pending, 0)

    def reject(self, response: Response) -> None:
        """Interconnect refused the request outright."""
        self.phase = Phase.IN_FLIGHT
        self.completion = response

    def drive(self, cycle: int) -> MasterSignals:
        sig = self._signals
        data = self.pending.data
        if self.pending.opcode is Opcode.WRITE_ARR:
            k = cycle - self.grant_cycle - 2
            sig.beat_data = data[k] if 0 <= k < len(data) else 0
        return sig

    def observe(self, sig: SlaveSignals, cycle: int) -> None:
        if sig.out_valid:
            self._beats.append(sig.data_out)
        if sig.ack:
            op = self.pending.opcode
            if sig.status is not Status.OK:
                data = ()
            elif op is Opcode.READ:
                data = (sig.data_out,)
            elif op is Opcode.READ_ARR:
                data = tuple(self._beats)
            else:
                data = ()
            self.completion = Response(sig.status, sig.vptr_out, data, cycle)

    # -- instruction interpretation ----------------------------------------

    def _run(self, cycle):
        prog = self.program
        while True:
            ins = prog[self.pc]
            kind = ins.kind
            if kind == "end":
                self.phase = Phase.DONE
                self.finished = True
                self.end_cycle = cycle
                return None
            if kind == "wait":
                self.pc += 1
                if ins.dim:
                    self.phase = Phase.SLEEPING
                    self.wake_cycle = cycle + ins.dim
                    return None
                continue
            if kind == "assert":
                got = self.env[ins.dest[0]]
                if got != ins.values[0]:
                    self._fail(f"assert {ins.dest[0]}: expected {ins.values[0]:#x}, got {got:#x}",
                               ins, cycle)
                    return None
                self.pc += 1
                continue
            self.pending = self._request(ins)
            self.completion = None
            self.phase = Phase.WAITING_GRANT
            return self.pending

    def _request(self, ins):
        op = ins.opcode
        if op is Opcode.ALLOC:
            return Request(self.pe_id, ins.mem, op, 0, ins.dim, ins.elem_type)
        addr = ins.addr.eval(self.env)
        t = self.var_types.get(ins.addr.var, ElemType.U32)
        return Request(self.pe_id, ins.mem, op, addr, ins.dim, t, ins.values)

    def _complete(self, resp, cycle):
        ins = self.program[self.pc]
        want = ins.expect if ins.expect is not None else Status.OK
        if want is not ANY_STATUS and resp.status is not want:
            self._fail(f"{ins.kind} returned {resp.status.name}, expected {want.name}", ins, cycle)
            return
        if ins.kind == "alloc":
            self.env[ins.dest[0]] = resp.vptr_out
            self.var_types[ins.dest[0]] = ins.elem_type
        elif ins.dest:
            data = resp.data_out or (0,) * len(ins.dest)
            for name, w in zip(ins.dest, data):
                self.env[name] = w
        self.pc += 1
        self.phase = Phase.READY
        self.completion = None

    def _fail(self, reason, ins, cycle):
        self.phase = Phase.FAILED
        self.finished = True
        self.fail_reason = reason
        self.fail_line = ins.line
        self.end_cycle = cycle
