"""Allocation bookkeeping for one shared-memory module.

Virtual pointers form an arithmetic series: each new allocation starts where
the last row of the table ends, and an empty table hands out 0. Freed rows are
dropped from the table without moving any live allocation, so a Vptr held by a
processing element stays valid until it is freed. Because rows are only ever
appended, their start addresses are strictly increasing and lookups bisect.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass

from .protocol import WORD_MASK, ElemType, Status
from .translator import BackingStore


class TableError(Exception):
    """A table operation refused with a bus status."""

    def __init__(self, status: Status, msg: str = ""):
        super().__init__(msg or status.name)
        self.status = status


@dataclass
class TableEntry:
    vptr: int
    dim: int
    elem_type: ElemType
    buf: int
    reserved_by: int | None = None

    @property
    def size_bytes(self) -> int:
        return self.dim * self.elem_type.size

    @property
    def end(self) -> int:
        return self.vptr + self.size_bytes


class PointerTable:
    def __init__(self, capacity_bytes: int):
        if capacity_bytes < 1:
            raise ValueError("capacity_bytes must be >= 1")
        self.capacity_bytes = capacity_bytes
        self.used_bytes = 0
        self.entries: list[TableEntry] = []

    def __len__(self):
        return len(self.entries)

    def used(self) -> int:
        return self.used_bytes

    def capacity(self) -> int:
        return self.capacity_bytes

    def next_vptr(self) -> int:
        if not self.entries:
            return 0
        last = self.entries[-1]
        return last.vptr + last.size_bytes

    def check_insert(self, dim: int, t: ElemType) -> int:
        """Vptr the allocation would receive; raises if it would be refused."""
        if dim < 1:
            raise TableError(Status.ERR_BADOP, "dim must be >= 1")
        size = dim * t.size
        if self.used_bytes + size > self.capacity_bytes:
            raise TableError(Status.ERR_OOM, f"{size} bytes exceed capacity")
        vptr = self.next_vptr()
        if vptr + size > WORD_MASK + 1:
            raise TableError(Status.ERR_OOM, "virtual address space exhausted")
        return vptr

    def insert(self, dim: int, t: ElemType, store: BackingStore) -> tuple[int, int]:
        vptr = self.check_insert(dim, t)
        size = dim * t.size
        h = store.alloc_zeroed(size)
        self.entries.append(TableEntry(vptr, dim, t, h))
        self.used_bytes += size
        return vptr, h

    def resolve(self, vaddr: int) -> tuple[int, int]:
        """Entry index and byte offset of the live allocation covering ``vaddr``."""
        i = bisect.bisect_right(self.entries, vaddr, key=_start) - 1
        if i < 0 or vaddr >= self.entries[i].end:
            raise TableError(Status.ERR_BADPTR, f"no allocation covers {vaddr:#x}")
        entry = self.entries[i]
        off = vaddr - entry.vptr
        if off % entry.elem_type.size:
            raise TableError(Status.ERR_BADPTR, f"{vaddr:#x} not {entry.elem_type.name}-aligned")
        return i, off

    def find(self, vptr: int) -> int:
        """Index of the entry starting exactly at ``vptr``."""
        i = bisect.bisect_left(self.entries, vptr, key=_start)
        if i == len(self.entries) or self.entries[i].vptr != vptr:
            raise TableError(Status.ERR_BADPTR, f"no allocation starts at {vptr:#x}")
        return i

    def check_access(self, entry: TableEntry, pe: int) -> None:
        if entry.reserved_by is not None and entry.reserved_by != pe:
            raise TableError(
                Status.ERR_RESERVED, f"{entry.vptr:#x} reserved by pe{entry.reserved_by}"
            )

    def remove(self, vptr: int, store: BackingStore, pe: int | None = None) -> None:
        i = self.find(vptr)
        entry = self.entries[i]
        if pe is not None:
            self.check_access(entry, pe)
        del self.entries[i]
        self.used_bytes -= entry.size_bytes
        store.release(entry.buf)

    def reserve(self, vptr: int, pe: int) -> None:
        entry = self.entries[self.find(vptr)]
        self.check_access(entry, pe)
        entry.reserved_by = pe

    def release(self, vptr: int, pe: int) -> None:
        entry = self.entries[self.find(vptr)]
        if entry.reserved_by != pe:
            raise TableError(Status.ERR_RESERVED, f"pe{pe} does not hold {vptr:#x}")
        entry.reserved_by = None


def _start(entry: TableEntry) -> int:
    return entry.vptr
