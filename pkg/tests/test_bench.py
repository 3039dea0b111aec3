from shmsim.bench import bench, bench_workloads
from shmsim.config import SystemConfig


def test_workloads_identical_mix():
    one = bench_workloads(4, 1, 1000, 3)
    four = bench_workloads(4, 4, 1000, 3)
    assert [p.n_transactions for p in one] == [250] * 4
    for p1, p4 in zip(one, four):
        assert [(i.kind, i.addr, i.values) for i in p1] == [(i.kind, i.addr, i.values) for i in p4]
    assert {i.mem for i in four[2] if i.opcode is not None} == {2}
    assert {i.mem for p in one for i in p if i.opcode is not None} == {0}


def test_bench_report():
    rep = bench(SystemConfig(n_pes=4), SystemConfig(n_pes=4, n_mems=4), 4000, 0)
    assert rep.one.ok and rep.many.ok
    assert rep.one.transactions == rep.many.transactions == 4000
    # one shared module serializes everything; four modules overlap
    assert rep.one.cycles > rep.many.cycles
    assert "degradation" in rep.text()


def test_cycle_counts_repeatable():
    cfg1, cfg4 = SystemConfig(n_pes=4), SystemConfig(n_pes=4, n_mems=4)
    a = bench(cfg1, cfg4, 4000, 5)
    b = bench(cfg1, cfg4, 4000, 5)
    assert (a.one.cycles, a.many.cycles) == (b.one.cycles, b.many.cycles)


def test_config_against_itself():
    cfg = SystemConfig(n_pes=4)
    rep = bench(cfg, cfg, 20_000, 0, repeats=3)
    assert rep.one.cycles == rep.many.cycles
    assert abs(rep.degradation_pct) < 25
