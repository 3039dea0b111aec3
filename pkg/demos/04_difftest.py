"""
Differential testing against the reference oracle
=================================================

A seeded stream of mixed requests goes to both the wrapper and a deliberately
naive reference model. Any difference in status, returned pointer or data
stops the run with a reproducer.
"""

from shmsim.difftest import difftest
from shmsim.pointer_table import PointerTable
from shmsim.wrapper import Wrapper

print(difftest(seed=1, n_ops=10_000).text())

###############################################################################
# A table that pads every new pointer by four bytes breaks the allocation
# rule. The oracle notices on the second allocation.


class Padded(PointerTable):
    def next_vptr(self):
        return super().next_vptr() + (4 if self.entries else 0)


def padded_wrapper(capacity, endianness):
    w = Wrapper(capacity, endianness)
    w.table.__class__ = Padded
    return w


print(difftest(seed=1, n_ops=10_000, wrapper_factory=padded_wrapper).text())
