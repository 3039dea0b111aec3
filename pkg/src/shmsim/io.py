"""Stats CSV and binary trace files.

Stats CSV: a version comment line followed by ``section,key,value`` rows in a
fixed order. Rows in the ``timing`` section depend on wall-clock time; every
other row is deterministic for a given config, workload set and seed.

Binary trace: all fields are little-endian unsigned 32-bit words::

    file    = "SHMT" u16 version u16 0, record*
    record  = sample_cycle ack_cycle delay n_beats n_req  req_word*n_req
              status vptr_out n_data  data_word*n_data

where the request words use the bus framing from :mod:`shmsim.protocol`.
"""
from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

from .kernel import Stats
from .protocol import Opcode, Response, Status, decode_request, encode_request
from .wrapper import Transaction

STATS_VERSION = 1
TRACE_MAGIC = b"SHMT"
TRACE_VERSION = 1

_HDR = struct.Struct("<4sHH")


def stats_rows(stats: Stats) -> list[tuple[str, str, object]]:
    rows: list[tuple[str, str, object]] = [
        ("run", "cycles_simulated", stats.cycles_simulated),
        ("run", "transactions", stats.transactions),
        ("run", "type_mismatches", stats.type_mismatches),
    ]
    rows += [("op_count", op.name, stats.op_counts[op]) for op in Opcode]
    rows += [("op_errors", op.name, stats.err_counts[op]) for op in Opcode]
    rows += [("status", s.name, stats.status_counts[s]) for s in Status]
    for m, (hw, cap) in enumerate(zip(stats.high_water, stats.capacity)):
        rows.append((f"mem{m}", "high_water_bytes", hw))
        rows.append((f"mem{m}", "capacity_bytes", cap))
    for p, (done, outcome) in enumerate(zip(stats.pe_completion, stats.pe_outcome)):
        rows.append((f"pe{p}", "outcome", outcome))
        rows.append((f"pe{p}", "completion_cycle", "" if done is None else done))
    rows.append(("timing", "wall_time_seconds", f"{stats.wall_time_seconds:.6f}"))
    rows.append(("timing", "cycles_per_second", f"{stats.cycles_per_second:.1f}"))
    return rows


def format_stats(stats: Stats) -> str:
    buf = io.StringIO()
    buf.write(f"# shmsim stats v{STATS_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("section", "key", "value"))
    w.writerows(stats_rows(stats))
    return buf.getvalue()


def emit_stats(stats: Stats, path) -> None:
    Path(path).write_text(format_stats(stats))


def encode_trace(records: list[Transaction]) -> bytes:
    out = [_HDR.pack(TRACE_MAGIC, TRACE_VERSION, 0)]
    for t in records:
        req = encode_request(t.request)
        r = t.response
        words = [t.sample_cycle, t.ack_cycle, t.delay, t.n_beats, len(req), *req,
                 int(r.status), r.vptr_out, len(r.data_out), *r.data_out]
        out.append(struct.pack(f"<{len(words)}I", *words))
    return b"".join(out)


def decode_trace(blob: bytes) -> list[Transaction]:
    magic, version, _ = _HDR.unpack_from(blob, 0)
    if magic != TRACE_MAGIC or version != TRACE_VERSION:
        raise ValueError("not a shmsim trace (bad magic or version)")
    if (len(blob) - _HDR.size) % 4:
        raise ValueError("truncated trace")
    words = struct.unpack_from(f"<{(len(blob) - _HDR.size) // 4}I", blob, _HDR.size)
    records = []
    i = 0
    while i < len(words):
        sample, ack, delay, n_beats, n_req = words[i:i + 5]
        i += 5
        req = decode_request(words[i:i + n_req])
        i += n_req
        status, vptr_out, n_data = words[i:i + 3]
        i += 3
        data = tuple(words[i:i + n_data])
        i += n_data
        records.append(
            Transaction(req, Response(Status(status), vptr_out, data, ack), sample, ack, delay, n_beats)
        )
    return records


def emit_trace(records: list[Transaction], path) -> None:
    Path(path).write_bytes(encode_trace(records))


def load_trace(path) -> list[Transaction]:
    return decode_trace(Path(path).read_bytes())
