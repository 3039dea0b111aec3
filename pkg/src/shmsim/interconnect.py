"""Crossbar interconnect: one channel per memory module, round-robin
arbitration per channel, zero routing latency."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


@dataclass
class Arbitration:
    grants: dict[int, int] = field(default_factory=dict)  # pe -> module
    rejected: list[int] = field(default_factory=list)  # pes with sm_addr >= n_mems


class Crossbar:
    def __init__(self, n_pes: int, n_mems: int):
        if n_pes < 1 or n_mems < 1:
            raise ValueError("need at least one pe and one memory")
        self.n_pes = n_pes
        self.n_mems = n_mems
        self.rr = [0] * n_mems
        self.owner: list[int | None] = [None] * n_mems
        self.grant_cycle = [0] * n_mems

    def busy(self, mem: int) -> bool:
        return self.owner[mem] is not None

    def arbitrate(self, requests: Sequence[int | None], cycle: int) -> Arbitration:
        """``requests[pe]`` is the module pe wants this cycle, or None.

        For each free module the winner is the first requester at or after
        the round-robin pointer; the pointer then moves just past it.
        """
        result = Arbitration()
        wanted: dict[int, list[int]] = {}
        for pe, mem in enumerate(requests):
            if mem is None:
                continue
            if not 0 <= mem < self.n_mems:
                result.rejected.append(pe)
            elif self.owner[mem] is None:
                wanted.setdefault(mem, []).append(pe)
        n = self.n_pes
        for mem, pes in wanted.items():
            start = self.rr[mem]
            winner = min(pes, key=lambda p: (p - start) % n)
            self.rr[mem] = (winner + 1) % n
            self.owner[mem] = winner
            self.grant_cycle[mem] = cycle
            result.grants[winner] = mem
        return result

    def tick(self, cycle: int, acked: Iterable[int] = ()) -> None:
        """Free the channels whose wrapper acknowledged during ``cycle``."""
        for mem in acked:
            self.owner[mem] = None
