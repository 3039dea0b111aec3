"""Host-side backing store and the typed translator between bus words and
stored bytes."""
from __future__ import annotations

import enum
import itertools
import struct

from .protocol import WORD_MASK, ElemType


class SimulatorError(RuntimeError):
    """Internal invariant breach. Never reachable through the bus protocol."""


class Endianness(enum.Enum):
    LITTLE = "little"
    BIG = "big"


_FORMATS = {
    ElemType.U8: "B",
    ElemType.I8: "b",
    ElemType.U16: "H",
    ElemType.I16: "h",
    ElemType.U32: "I",
    ElemType.I32: "i",
}
_PREFIX = {Endianness.LITTLE: "<", Endianness.BIG: ">"}

# (type, endianness) -> (packer for the unsigned view, unpacker for the typed view)
_CODECS = {
    (t, e): (
        struct.Struct(_PREFIX[e] + _FORMATS[t].upper()),
        struct.Struct(_PREFIX[e] + _FORMATS[t]),
    )
    for t in ElemType
    for e in Endianness
}


def encode(value: int, t: ElemType, e: Endianness) -> bytes:
    """Low DATA_SIZE bytes of ``value`` in byte order ``e``."""
    pack = _CODECS[t, e][0]
    return pack.pack(value & ((1 << (8 * t.size)) - 1))


def decode(b: bytes, t: ElemType, e: Endianness) -> int:
    """Bytes back to a 32-bit word, sign-extending the signed types."""
    if len(b) != t.size:
        raise SimulatorError(f"{t.name} needs {t.size} bytes, got {len(b)}")
    return _CODECS[t, e][1].unpack(b)[0] & WORD_MASK


class BackingStore:
    """Zero-initialised host buffers addressed by opaque integer handles.

    Handles come from a monotonically increasing counter, so a released handle
    is never handed out again.
    """

    def __init__(self):
        self._buffers: dict[int, bytearray] = {}
        self._ids = itertools.count(1)
        self.allocs = 0
        self.releases = 0

    def __len__(self):
        return len(self._buffers)

    def __contains__(self, h):
        return h in self._buffers

    def alloc_zeroed(self, n_bytes: int) -> int:
        if n_bytes < 1:
            raise SimulatorError(f"cannot allocate {n_bytes} bytes")
        h = next(self._ids)
        self._buffers[h] = bytearray(n_bytes)
        self.allocs += 1
        return h

    def release(self, h: int) -> None:
        try:
            del self._buffers[h]
        except KeyError:
            raise SimulatorError(f"release of dead handle {h}") from None
        self.releases += 1

    def buffer(self, h: int) -> bytearray:
        try:
            return self._buffers[h]
        except KeyError:
            raise SimulatorError(f"lookup of dead handle {h}") from None

    def write_elem(self, h: int, byte_off: int, value: int, t: ElemType, e: Endianness) -> None:
        buf = self._checked(h, byte_off, t)
        buf[byte_off:byte_off + t.size] = encode(value, t, e)

    def read_elem(self, h: int, byte_off: int, t: ElemType, e: Endianness) -> int:
        buf = self._checked(h, byte_off, t)
        return decode(bytes(buf[byte_off:byte_off + t.size]), t, e)

    def _checked(self, h, byte_off, t):
        buf = self.buffer(h)
        if byte_off < 0 or byte_off + t.size > len(buf) or byte_off % t.size:
            raise SimulatorError(
                f"{t.name} access at offset {byte_off} outside/misaligned in {len(buf)}-byte buffer"
            )
        return buf
