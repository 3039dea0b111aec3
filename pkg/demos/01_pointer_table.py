"""
Virtual pointers and the pointer table
======================================

Every allocation gets the next address of an arithmetic series: the first
one is 0, and each later one starts where the last row of the table ends.
Freeing a row removes it without moving anything else.
"""

from shmsim import BackingStore, ElemType, PointerTable

table = PointerTable(capacity_bytes=64)
store = BackingStore()

a, _ = table.insert(10, ElemType.U32, store)   # 40 bytes
b, _ = table.insert(4, ElemType.U16, store)    # 8 bytes
print("a at", a, "b at", b, "used", table.used(), "of", table.capacity())

###############################################################################
# A 20-byte request would take the table past its 64-byte limit.

from shmsim.pointer_table import TableError

try:
    table.insert(5, ElemType.U32, store)
except TableError as exc:
    print("refused:", exc.status.name)

###############################################################################
# Pointer arithmetic: any address inside a live allocation resolves to the
# row plus a byte offset, as long as it is aligned to the element type.

print("resolve(12) ->", table.resolve(12))
print("resolve(44) ->", table.resolve(44))

###############################################################################
# Removing ``b`` drops its row. The next allocation then follows ``a``,
# so the freed address is handed out again.

table.remove(b, store)
c, _ = table.insert(2, ElemType.U32, store)
print("c at", c, "rows", [(e.vptr, e.size_bytes) for e in table.entries])
