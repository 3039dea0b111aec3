"""Command-line entry point: ``run``, ``difftest`` and ``bench``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import bench
from .config import ConfigError, load_config
from .difftest import difftest
from .io import emit_stats, emit_trace
from .kernel import run
from .pe import WorkloadSyntaxError, parse_workload


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    programs = []
    for path in args.workload:
        try:
            programs.append(parse_workload(Path(path).read_text()))
        except WorkloadSyntaxError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return 2
    if len(programs) != cfg.n_pes:
        print(f"{len(programs)} workloads given for {cfg.n_pes} pes", file=sys.stderr)
        return 2
    result = run(cfg, programs)
    if args.stats:
        emit_stats(result.stats, args.stats)
    if args.trace:
        emit_trace(result.trace, args.trace)
    st = result.stats
    print(f"cycles={st.cycles_simulated} transactions={st.transactions} "
          f"speed={st.cycles_per_second:.0f} cycles/s")
    for o in result.outcomes:
        if o.ok:
            print(f"pe{o.pe_id}: DONE at cycle {o.end_cycle}")
        else:
            print(f"pe{o.pe_id}: FAILED at cycle {o.end_cycle}, {args.workload[o.pe_id]} "
                  f"line {o.line}: {o.reason}")
    return 0 if result.ok else 1


def _cmd_difftest(args) -> int:
    report = difftest(args.seed, args.ops)
    sys.stdout.write(report.text())
    return 0 if report.passed else 1


def _cmd_bench(args) -> int:
    try:
        cfg1 = load_config(args.config1)
        cfg4 = load_config(args.config4)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    report = bench(cfg1, cfg4, args.ops, args.seed, args.repeats)
    sys.stdout.write(report.text())
    return 0 if report.one.ok and report.many.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shmsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate workloads on a configured system")
    r.add_argument("--config", required=True)
    r.add_argument("--workload", required=True, nargs="+", help="one file per pe, in pe order")
    r.add_argument("--stats", help="write stats CSV here")
    r.add_argument("--trace", help="write binary transaction trace here")
    r.set_defaults(func=_cmd_run)

    d = sub.add_parser("difftest", help="fuzz the wrapper against the reference oracle")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--ops", type=int, default=10_000)
    d.set_defaults(func=_cmd_difftest)

    b = sub.add_parser("bench", help="simulation speed, one shared memory vs one per pe")
    b.add_argument("--config1", required=True)
    b.add_argument("--config4", required=True)
    b.add_argument("--ops", type=int, default=100_000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=1, help="keep the best of N timings")
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
