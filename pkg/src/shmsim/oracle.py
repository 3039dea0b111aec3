"""Reference model of the memory modules' functional behaviour.

Written against the request/response contract only: no FSM, no timing, and
none of the pointer-table or translator code. Allocations are plain records
holding a flat ``bytearray``; lookups scan the list; element packing goes
through ``int.to_bytes``/``int.from_bytes``.
"""
from __future__ import annotations

from .protocol import Opcode, Request, Status

_WIDTH = {"U8": 1, "I8": 1, "U16": 2, "I16": 2, "U32": 4, "I32": 4}
_ADDR_SPACE = 1 << 32


class _Alloc:
    __slots__ = ("vptr", "width", "signed", "mem", "holder")

    def __init__(self, vptr, count, type_name):
        self.vptr = vptr
        self.width = _WIDTH[type_name]
        self.signed = type_name.startswith("I")
        self.mem = bytearray(count * self.width)
        self.holder = None


class ReferenceOracle:
    def __init__(self, capacity_bytes: int = 65536, byteorder: str = "little"):
        self.capacity = capacity_bytes
        self.byteorder = byteorder
        self.allocs: list[_Alloc] = []

    def used(self) -> int:
        return sum(len(a.mem) for a in self.allocs)

    def apply(self, r: Request) -> tuple[Status, int, tuple[int, ...]]:
        op = r.opcode
        if op == Opcode.ALLOC:
            return self._alloc(r)

        if op in (Opcode.FREE, Opcode.RESERVE, Opcode.RELEASE):
            hit = [a for a in self.allocs if a.vptr == r.vptr]
            if not hit:
                return (Status.ERR_BADPTR, 0, ())
            a = hit[0]
            if op == Opcode.RELEASE:
                if a.holder != r.pe_id:
                    return (Status.ERR_RESERVED, 0, ())
                a.holder = None
                return (Status.OK, 0, ())
            if a.holder is not None and a.holder != r.pe_id:
                return (Status.ERR_RESERVED, 0, ())
            if op == Opcode.FREE:
                self.allocs.remove(a)
            else:
                a.holder = r.pe_id
            return (Status.OK, 0, ())

        hit = [a for a in self.allocs if a.vptr <= r.vptr < a.vptr + len(a.mem)]
        if not hit:
            return (Status.ERR_BADPTR, 0, ())
        a = hit[0]
        off = r.vptr - a.vptr
        n = r.dim if op in (Opcode.READ_ARR, Opcode.WRITE_ARR) else 1
        if off % a.width or off + n * a.width > len(a.mem):
            return (Status.ERR_BADPTR, 0, ())
        if op in (Opcode.WRITE, Opcode.WRITE_ARR) and a.holder not in (None, r.pe_id):
            return (Status.ERR_RESERVED, 0, ())

        if op in (Opcode.WRITE, Opcode.WRITE_ARR):
            for k, value in enumerate(r.data):
                lo = off + k * a.width
                a.mem[lo:lo + a.width] = (value % (1 << (8 * a.width))).to_bytes(
                    a.width, self.byteorder)
            return (Status.OK, 0, ())
        out = []
        for k in range(n):
            lo = off + k * a.width
            v = int.from_bytes(a.mem[lo:lo + a.width], self.byteorder, signed=a.signed)
            out.append(v % _ADDR_SPACE)
        return (Status.OK, 0, tuple(out))

    def _alloc(self, r):
        size = r.dim * _WIDTH[r.elem_type.name]
        if self.used() + size > self.capacity:
            return (Status.ERR_OOM, 0, ())
        if self.allocs:
            last = self.allocs[-1]
            vptr = last.vptr + len(last.mem)
        else:
            vptr = 0
        if vptr + size > _ADDR_SPACE:
            return (Status.ERR_OOM, 0, ())
        self.allocs.append(_Alloc(vptr, r.dim, r.elem_type.name))
        return (Status.OK, vptr, ())


def oracle_apply(o: ReferenceOracle, r: Request) -> tuple[Status, int, tuple[int, ...]]:
    return o.apply(r)
