"""Exit criteria for the simulator. Each test prints one PASS/FAIL line in
the terminal summary (see conftest.py)."""
import random
import statistics
import time

import pytest

from shmsim.audit import (
    in_flight_violations,
    overlap_violations,
    reservation_violations,
    timing_violations,
)
from shmsim.bench import bench
from shmsim.cli import main
from shmsim.config import SystemConfig
from shmsim.difftest import difftest
from shmsim.kernel import run
from shmsim.pe import parse_workload
from shmsim.pointer_table import PointerTable, TableError
from shmsim.protocol import ElemType, Opcode, Request, Status
from shmsim.translator import BackingStore, Endianness, decode, encode
from shmsim.wrapper import DelayConfig, Wrapper

pytestmark = pytest.mark.acceptance


def test_criterion_1_vptr_rule():
    start = time.perf_counter()
    checked = 0
    for seed in range(1000):
        rng = random.Random(seed)
        table, store = PointerTable(rng.choice([256, 1024, 4096])), BackingStore()
        replay = []  # (vptr, size) in table order
        for _ in range(rng.randint(1, 60)):
            if replay and rng.random() < 0.4:
                vptr, _ = replay.pop(rng.randrange(len(replay)))
                table.remove(vptr, store)
                continue
            t = rng.choice(list(ElemType))
            dim = rng.randint(1, 40)
            expected = replay[-1][0] + replay[-1][1] if replay else 0
            try:
                vptr, _ = table.insert(dim, t, store)
            except TableError as exc:
                assert exc.status is Status.ERR_OOM
                continue
            assert vptr == expected, f"seed {seed}: got {vptr}, rule gives {expected}"
            replay.append((vptr, dim * t.size))
            checked += 1
    elapsed = time.perf_counter() - start
    assert checked > 10_000
    assert elapsed < 5, f"{elapsed:.1f}s"


def test_criterion_2_oracle_equivalence():
    start = time.perf_counter()
    reports = [difftest(seed, 10_000) for seed in range(10)]
    elapsed = time.perf_counter() - start
    failed = [r.text() for r in reports if not r.passed]
    assert not failed, failed[0]
    assert sum(r.executed for r in reports) == 100_000
    assert elapsed < 30, f"{elapsed:.1f}s"


def _timing_suite():
    """Workloads touching every opcode, arrays of 1, 4 and 64 words, plus
    error paths, on two modules."""
    words64 = " ".join(str(i) for i in range(64))
    vars64 = " ".join(f"$v{i}" for i in range(64))
    a = f"""
    alloc $a mem0 64 u32
    write mem0 $a+8 5
    read $r mem0 $a+8
    warr mem0 $a 9
    rarr $x mem0 $a 1
    warr mem0 $a+4 1 2 3 4
    rarr $p $q $s $t mem0 $a+4 4
    warr mem0 $a {words64}
    rarr {vars64} mem0 $a 64
    reserve mem0 $a
    release mem0 $a
    read $e mem0 $a+256 expect err_badptr
    warr mem0 $a+252 1 2 expect err_badptr
    alloc $big mem0 100000 u32 expect err_oom
    free mem0 $a
    end
    """
    b = f"""
    alloc $b mem1 64 i16
    wait 3
    warr mem1 $b {words64}
    rarr {vars64} mem1 $b 64
    reserve mem1 $b
    write mem1 $b+2 7
    release mem1 $b
    free mem1 $b
    free mem1 $b expect err_badptr
    end
    """
    c = f"""
    alloc $c mem0 4 u8
    warr mem0 $c 1 2 3 4
    rarr $w $x $y $z mem0 $c 4
    read $r mem1 0 expect any
    free mem0 $c
    end
    """
    return [parse_workload(t) for t in (a, b, c)]


@pytest.mark.parametrize("delays", [
    DelayConfig(),
    DelayConfig({op: 2 for op in Opcode}, per_word=1),
    DelayConfig({op: int(op) for op in Opcode}, per_word=3),
], ids=["zero", "base2_word1", "per_opcode_word3"])
def test_criterion_3_timing_exactness(delays):
    start = time.perf_counter()
    cfg = SystemConfig(n_pes=3, n_mems=2, delays=delays)
    res = run(cfg, _timing_suite())
    assert res.ok, [o.reason for o in res.failures()]
    routed = [t for t in res.trace if t.request.sm_addr < cfg.n_mems]
    assert {t.request.opcode for t in routed} == set(Opcode)
    assert {t.request.dim for t in routed if t.request.opcode.is_array} == {1, 4, 64, 2}
    for t in routed:
        op, dim = t.request.opcode, t.request.dim
        b = dim if op.is_array else 0
        d = delays.base[op] + delays.per_word * b
        assert t.ack_cycle - t.sample_cycle == 2 + d + b
    assert not timing_violations(res.trace, delays, cfg.n_mems)
    assert not overlap_violations(res.trace, cfg.n_mems)
    assert not in_flight_violations(res.trace)
    assert time.perf_counter() - start < 5


def test_criterion_4_capacity_enforcement():
    prog = parse_workload("alloc $a mem0 10 u32\nalloc $b mem0 4 u16\n"
                          "alloc $c mem0 5 u32 expect err_oom\nend")
    res = run(SystemConfig(capacity_bytes=64), [prog])
    assert res.ok
    assert [t.response.status for t in res.trace] == [Status.OK, Status.OK, Status.ERR_OOM]
    assert res.stats.high_water == [48]

    for seed in range(200):
        rng = random.Random(seed)
        w = Wrapper(64)
        live = []
        for _ in range(200):
            if live and rng.random() < 0.35:
                v = live.pop(rng.randrange(len(live)))
                assert w.execute(Request(0, 0, Opcode.FREE, v)).ok
            else:
                t = rng.choice(list(ElemType))
                r = w.execute(Request(0, 0, Opcode.ALLOC, dim=rng.randint(1, 20), elem_type=t))
                if r.ok:
                    live.append(r.vptr_out)
            assert w.table.used() <= 64
        assert w.high_water <= 64


def _random_two_pe(seed):
    """Holder pe0 and intruder pe1 fight over two shared allocations at known
    addresses (0 and 64)."""
    rng = random.Random(seed)
    progs = []
    for pe in range(2):
        lines = ["alloc $a mem0 16 u32", "alloc $b mem0 16 u32"] if pe == 0 else ["wait 7"]
        for _ in range(rng.randint(10, 30)):
            base = rng.choice((0, 64))
            off = 4 * rng.randrange(16)
            kind = rng.random()
            if kind < 0.2:
                lines.append(f"reserve mem0 {base} expect any")
            elif kind < 0.35:
                lines.append(f"release mem0 {base} expect any")
            elif kind < 0.6:
                lines.append(f"write mem0 {base + off} {rng.getrandbits(32)} expect any")
            elif kind < 0.7:
                lines.append(f"warr mem0 {base} 1 2 3 expect any")
            elif kind < 0.8:
                lines.append(f"read $r mem0 {base + off} expect any")
            elif kind < 0.88:
                lines.append(f"free mem0 {base} expect any")
            else:
                lines.append(f"wait {rng.randint(1, 6)}")
        lines.append("end")
        progs.append(parse_workload("\n".join(lines)))
    return progs


def test_criterion_5_reservation_mutual_exclusion():
    scripted = [
        parse_workload("alloc $a mem0 8 u32\nreserve mem0 $a\nwait 20\n"
                       "write mem0 $a+4 1\nwarr mem0 $a 1 2\nrelease mem0 $a\n"
                       "free mem0 $a\nend"),
        parse_workload("wait 10\nwrite mem0 4 9 expect err_reserved\n"
                       "warr mem0 0 9 9 expect err_reserved\n"
                       "free mem0 0 expect err_reserved\nread $r mem0 0\nend"),
    ]
    res = run(SystemConfig(n_pes=2), scripted)
    assert res.ok, [o.reason for o in res.failures()]
    by_pe = {0: [], 1: []}
    for t in res.trace:
        by_pe[t.request.pe_id].append(t.response.status)
    assert all(s is Status.OK for s in by_pe[0])
    assert by_pe[1] == [Status.ERR_RESERVED] * 3 + [Status.OK]

    refused = 0
    for seed in range(100):
        res = run(SystemConfig(n_pes=2), _random_two_pe(seed))
        assert res.ok
        assert not reservation_violations(res.trace, 1), f"seed {seed}"
        refused += sum(t.response.status is Status.ERR_RESERVED for t in res.trace)
    assert refused > 0


def test_criterion_6_endianness_and_types():
    assert encode(0x12345678, ElemType.U32, Endianness.LITTLE) == bytes.fromhex("78563412")
    assert encode(0x12345678, ElemType.U32, Endianness.BIG) == bytes.fromhex("12345678")
    rng = random.Random(6)
    for t in ElemType:
        for e in Endianness:
            width = t.size
            for _ in range(1000):
                v = rng.getrandbits(32)
                raw = encode(v, t, e)
                assert raw == (v % (1 << 8 * width)).to_bytes(width, e.value)
                back = decode(raw, t, e)
                assert back == int.from_bytes(raw, e.value, signed=t.signed) % (1 << 32)
                assert back % (1 << 8 * width) == v % (1 << 8 * width)


def test_criterion_7_experiment_shape(capsys):
    start = time.perf_counter()
    cfg1 = SystemConfig(n_pes=4, n_mems=1)
    cfg4 = SystemConfig(n_pes=4, n_mems=4)
    reports = [bench(cfg1, cfg4, 100_000, 0) for _ in range(3)]
    elapsed = time.perf_counter() - start
    with capsys.disabled():
        for i, rep in enumerate(reports):
            print(f"\n[bench run {i}]\n{rep.text()}", end="")
    for rep in reports:
        assert rep.one.ok and rep.many.ok
        assert rep.one.transactions == rep.many.transactions >= 100_000
    assert len({(r.one.cycles, r.many.cycles) for r in reports}) == 1
    degr = [r.degradation_pct for r in reports]
    mean = statistics.fmean(degr)
    assert all(abs(d - mean) <= 10 for d in degr), degr
    assert elapsed < 60, f"{elapsed:.1f}s"


def _strip_wall(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("timing,"))


DETERMINISM_SOURCES = [
    "alloc $a mem0 8 u32\nwarr mem0 $a 1 2 3\nrarr $x $y $z mem0 $a 3\n"
    "reserve mem0 $a\nwrite mem0 $a+4 9\nrelease mem0 $a\nfree mem0 $a\nend\n",
    "alloc $b mem1 4 i8\nwait 2\nwrite mem1 $b+3 0xFF\nread $r mem1 $b+3\n"
    "assert $r -1\nfree mem1 $b\nend\n",
    "wait 1\nread $q mem0 0 expect any\nalloc $c mem0 2 u16\nfree mem0 $c\nend\n",
]


def test_criterion_8_determinism(tmp_path, capsys):
    (tmp_path / "sys.cfg").write_text("[system]\npes = 3\nmemories = 2\n"
                                      "[delays]\nread_base = 2\nper_word = 1\n")
    workloads = []
    for i, src in enumerate(DETERMINISM_SOURCES):
        path = tmp_path / f"pe{i}.wl"
        path.write_text(src)
        workloads.append(str(path))
    outputs = []
    for i in range(2):
        stats, trace = tmp_path / f"s{i}.csv", tmp_path / f"t{i}.bin"
        code = main(["run", "--config", str(tmp_path / "sys.cfg"), "--workload", *workloads,
                     "--stats", str(stats), "--trace", str(trace)])
        assert code == 0
        outputs.append((_strip_wall(stats.read_text()), trace.read_bytes()))
    assert outputs[0] == outputs[1]
    assert len(outputs[0][1]) > 8

    capsys.readouterr()
    reports = []
    for _ in range(2):
        assert main(["difftest", "--seed", "42", "--ops", "5000"]) == 0
        reports.append(capsys.readouterr().out)
    assert reports[0] == reports[1]
