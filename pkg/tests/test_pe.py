import pytest

from shmsim.config import SystemConfig
from shmsim.kernel import run
from shmsim.pe import Phase, WorkloadSyntaxError, parse_workload
from shmsim.protocol import ElemType, Opcode, Status


def test_parse_minimal():
    prog = parse_workload("alloc $a mem0 16 u32\nend")
    assert len(prog) == 2
    assert prog[0].kind == "alloc" and prog[0].dim == 16 and prog[0].elem_type is ElemType.U32


def test_parse_full_grammar():
    text = """
    # comment line
    ALLOC $a mem1 8 i16        # trailing comment
    write mem1 $a+0x4 -1
    read $r mem1 $a+4
    warr mem1 $a 1 2 0x3
    rarr $x $y mem1 $a+2 2
    reserve mem1 $a
    release mem1 $a
    free mem1 $a
    free mem1 $a expect err_badptr
    read $z mem1 0x1000 expect ERR_BADPTR
    assert $r 0xFFFFFFFF
    wait 3
    end
    """
    prog = parse_workload(text)
    kinds = [i.kind for i in prog]
    assert kinds == ["alloc", "write", "read", "warr", "rarr", "reserve", "release",
                     "free", "free", "read", "assert", "wait", "end"]
    assert prog[1].values == (0xFFFFFFFF,) and prog[1].addr.offset == 4
    assert prog[3].dim == 3 and prog[3].values == (1, 2, 3)
    assert prog[4].dest == ("$x", "$y") and prog[4].dim == 2
    assert prog[8].expect is Status.ERR_BADPTR
    assert prog[9].addr.var is None and prog[9].addr.offset == 0x1000
    assert prog.n_transactions == 10
    assert prog[0].opcode is Opcode.ALLOC


@pytest.mark.parametrize("text,line,fragment", [
    ("write mem0 $a+12 0x2A\nend", 1, "undefined variable $a"),
    ("alloc $a mem0 4 u64\nend", 1, "unknown type"),
    ("alloc $a mem0 0 u32\nend", 1, ">= 1"),
    ("alloc $a mem0 4 u32\nassert $b 1\nend", 2, "undefined variable $b"),
    ("alloc $a mem0 4 u32", 1, "does not end"),
    ("end\nwait 1", 2, "after end"),
    ("frob 1\nend", 1, "unknown mnemonic"),
    ("alloc $a m0 4 u32\nend", 1, "expected memN"),
    ("alloc $a mem0 4 u32\nrarr $x $y mem0 $a 3\nend", 2, "does not match"),
    ("alloc $a mem0 4 u32 expect err_nope\nend", 1, "unknown status"),
    ("wait 2 expect ok\nend", 1, "expect only applies"),
    ("alloc $a mem0 4\nend", 1, "takes 4 operands"),
])
def test_parse_errors_cite_line(text, line, fragment):
    with pytest.raises(WorkloadSyntaxError) as ei:
        parse_workload(text)
    assert ei.value.line == line
    assert fragment in str(ei.value)


def test_parse_error_column():
    with pytest.raises(WorkloadSyntaxError) as ei:
        parse_workload("alloc $a mem0 4 u32\n  write mem0 $b 1\nend")
    assert (ei.value.line, ei.value.col) == (2, 14)


def test_bad_module_accepted_at_parse_rejected_at_run():
    prog = parse_workload("alloc $a mem9 1 u32\nend")
    res = run(SystemConfig(n_mems=4), [prog])
    assert not res.ok
    assert "ERR_BADOP" in res.outcomes[0].reason
    assert res.trace[0].response.status is Status.ERR_BADOP


def test_single_alloc_binds_zero():
    res = run(SystemConfig(), [parse_workload("alloc $a mem0 1 u32\nend")])
    assert res.ok and res.outcomes[0].env == {"$a": 0}
    assert len(res.trace) == 1 and res.trace[0].request.opcode is Opcode.ALLOC


def test_wait_delays_next_issue():
    prog = parse_workload("alloc $a mem0 1 u32\nwait 5\nread $r mem0 $a\nend")
    res = run(SystemConfig(), [prog])
    # alloc acked at 2 and consumed at 3, where the wait starts
    assert res.trace[1].sample_cycle == 3 + 5


@pytest.mark.parametrize("value,ok", [("0x2A", True), ("0", False)])
def test_assert(value, ok):
    prog = parse_workload(f"alloc $a mem0 1 u32\nwrite mem0 $a {value}\n"
                          "read $r mem0 $a\nassert $r 0x2A\nend")
    res = run(SystemConfig(), [prog])
    assert res.ok is ok
    if not ok:
        assert res.outcomes[0].phase is Phase.FAILED and res.outcomes[0].line == 4


def test_expect_annotation():
    prog = parse_workload("alloc $a mem0 100 u32 expect err_oom\nend")
    assert run(SystemConfig(capacity_bytes=64), [prog]).ok
    prog = parse_workload("alloc $a mem0 1 u32 expect err_oom\nend")
    res = run(SystemConfig(capacity_bytes=64), [prog])
    assert not res.ok and "expected ERR_OOM" in res.outcomes[0].reason


def test_unexpected_error_fails_pe():
    res = run(SystemConfig(), [parse_workload("alloc $a mem0 1 u32\nfree mem0 $a+4\nend")])
    assert not res.ok and "ERR_BADPTR" in res.outcomes[0].reason


def test_rarr_binds_in_beat_order():
    prog = parse_workload("alloc $a mem0 3 i8\nwarr mem0 $a 1 2 0xFF\n"
                          "rarr $x $y $z mem0 $a 3\nend")
    env = run(SystemConfig(), [prog]).outcomes[0].env
    assert (env["$x"], env["$y"], env["$z"]) == (1, 2, 0xFFFFFFFF)


def test_sign_extension_through_program():
    prog = parse_workload("alloc $a mem0 2 i16\nwrite mem0 $a+2 0x8000\n"
                          "read $r mem0 $a+2\nassert $r -32768\nend")
    assert run(SystemConfig(), [prog]).ok


def test_expect_any_accepts_every_status():
    prog = parse_workload("read $r mem0 0x40 expect any\nalloc $a mem0 1 u32 expect ANY\n"
                          "assert $r 0\nend")
    res = run(SystemConfig(), [prog])
    assert res.ok and res.outcomes[0].env == {"$r": 0, "$a": 0}
