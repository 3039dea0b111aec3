"""Transaction vocabulary shared by processing elements, the interconnect and
the memory wrappers.

Every value on the bus is a 32-bit word. A request is framed as::

    word0 = pe_id << 24 | sm_addr << 16 | opcode << 8 | elem_type
    word1 = vptr
    word2 = dim
    word3.. = payload words (1 for WRITE, dim for WRITE_ARR, none otherwise)

The same framing is used by the binary trace format.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

WORD_MASK = 0xFFFFFFFF
HEADER_WORDS = 3


class Opcode(enum.IntEnum):
    ALLOC = 0
    READ = 1
    WRITE = 2
    FREE = 3
    READ_ARR = 4
    WRITE_ARR = 5
    RESERVE = 6
    RELEASE = 7

    @property
    def is_array(self) -> bool:
        return self in (Opcode.READ_ARR, Opcode.WRITE_ARR)

    @property
    def mutates(self) -> bool:
        """Opcodes a reservation held by another PE refuses."""
        return self in (Opcode.WRITE, Opcode.WRITE_ARR, Opcode.FREE)


class ElemType(enum.IntEnum):
    U8 = 0
    I8 = 1
    U16 = 2
    I16 = 3
    U32 = 4
    I32 = 5

    @property
    def size(self) -> int:
        """DATA_SIZE in bytes."""
        return _SIZES[self]

    @property
    def signed(self) -> bool:
        return self in (ElemType.I8, ElemType.I16, ElemType.I32)

    @classmethod
    def from_name(cls, name: str) -> "ElemType":
        return cls[name.upper()]


_SIZES = {
    ElemType.U8: 1,
    ElemType.I8: 1,
    ElemType.U16: 2,
    ElemType.I16: 2,
    ElemType.U32: 4,
    ElemType.I32: 4,
}


class Status(enum.IntEnum):
    OK = 0
    ERR_OOM = 1
    ERR_BADPTR = 2
    ERR_RESERVED = 3
    ERR_BADOP = 4


class ProtocolError(ValueError):
    """A word sequence that does not decode to a valid request.

    Always carries ``Status.ERR_BADOP`` so callers can turn it straight into a
    bus response.
    """

    status = Status.ERR_BADOP


def payload_len(opcode: Opcode, dim: int) -> int:
    if opcode is Opcode.WRITE:
        return 1
    if opcode is Opcode.WRITE_ARR:
        return dim
    return 0


def response_len(opcode: Opcode, dim: int) -> int:
    if opcode is Opcode.READ:
        return 1
    if opcode is Opcode.READ_ARR:
        return dim
    return 0


def beats(opcode: Opcode, dim: int) -> int:
    """Number of one-word array beats a transaction occupies on the bus."""
    return dim if opcode.is_array else 0


@dataclass(frozen=True)
class Request:
    pe_id: int
    sm_addr: int
    opcode: Opcode
    vptr: int = 0
    dim: int = 0
    elem_type: ElemType = ElemType.U8
    data: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "opcode", Opcode(self.opcode))
        object.__setattr__(self, "elem_type", ElemType(self.elem_type))
        object.__setattr__(self, "data", tuple(self.data))
        if not 0 <= self.pe_id <= 0xFF:
            raise ValueError(f"pe_id out of range: {self.pe_id}")
        if not 0 <= self.sm_addr <= 0xFF:
            raise ValueError(f"sm_addr out of range: {self.sm_addr}")
        if not 0 <= self.vptr <= WORD_MASK or not 0 <= self.dim <= WORD_MASK:
            raise ValueError("vptr and dim are 32-bit unsigned")
        if self.opcode in (Opcode.ALLOC, Opcode.READ_ARR, Opcode.WRITE_ARR) and self.dim < 1:
            raise ValueError(f"{self.opcode.name} needs dim >= 1")
        if len(self.data) != payload_len(self.opcode, self.dim):
            raise ValueError(
                f"{self.opcode.name} carries {payload_len(self.opcode, self.dim)} "
                f"data words, got {len(self.data)}"
            )
        if any(not 0 <= w <= WORD_MASK for w in self.data):
            raise ValueError("data words are 32-bit unsigned")


@dataclass(frozen=True)
class Response:
    status: Status
    vptr_out: int = 0
    data_out: tuple[int, ...] = ()
    completion_cycle: int = 0

    @property
    def ok(self) -> bool:
        return self.status is Status.OK

    def key(self) -> tuple[Status, int, tuple[int, ...]]:
        """The functional part of a response, without timing."""
        return (self.status, self.vptr_out, self.data_out)


def error_response(status: Status, cycle: int = 0) -> Response:
    return Response(Status(status), 0, (), cycle)


@dataclass
class MasterSignals:
    """Master side of the handshake for one cycle.

    ``request`` carries the header fields; it must be held stable from the
    cycle the wrapper samples ``req`` until the ack.
    """

    req: bool = False
    request: Request | None = None
    beat_data: int = 0


@dataclass(frozen=True)
class SlaveSignals:
    ack: bool = False
    out_valid: bool = False
    status: Status = Status.OK
    data_out: int = 0
    vptr_out: int = 0
    # whole response, present only while ack is high
    response: Response | None = field(default=None, repr=False)


IDLE_MASTER = MasterSignals()


def encode_request(r: Request) -> list[int]:
    word0 = (r.pe_id << 24) | (r.sm_addr << 16) | (int(r.opcode) << 8) | int(r.elem_type)
    return [word0, r.vptr, r.dim, *r.data]


def decode_request(words: Sequence[int]) -> Request:
    if len(words) < HEADER_WORDS:
        raise ProtocolError(f"request needs {HEADER_WORDS} header words, got {len(words)}")
    word0, vptr, dim = words[0], words[1], words[2]
    op_field = (word0 >> 8) & 0xFF
    type_field = word0 & 0xFF
    try:
        opcode = Opcode(op_field)
    except ValueError:
        raise ProtocolError(f"undefined opcode {op_field}") from None
    try:
        elem_type = ElemType(type_field)
    except ValueError:
        raise ProtocolError(f"undefined element type {type_field}") from None
    expected = HEADER_WORDS + payload_len(opcode, dim)
    if len(words) != expected:
        raise ProtocolError(f"{opcode.name} frame needs {expected} words, got {len(words)}")
    try:
        return Request(
            pe_id=(word0 >> 24) & 0xFF,
            sm_addr=(word0 >> 16) & 0xFF,
            opcode=opcode,
            vptr=vptr,
            dim=dim,
            elem_type=elem_type,
            data=tuple(words[HEADER_WORDS:]),
        )
    except ValueError as exc:
        raise ProtocolError(str(exc)) from None
