import pytest

from shmsim.protocol import MasterSignals, Opcode


def drive(wrapper, request, start=0, drop_req_at=None, limit=10_000):
    """Act as a well-behaved master for one transaction.

    Holds ``req`` from ``start`` until ack, feeding WRITE_ARR beats on the
    cycles after DECODE. Returns ``(ack_cycle, response, out_beats)`` where
    ``out_beats`` lists ``(cycle, word)`` for every out_valid cycle.
    """
    beats = []
    for cycle in range(start, start + limit):
        k = cycle - start - 2
        data = request.data[k] if request.opcode is Opcode.WRITE_ARR and 0 <= k < request.dim else 0
        held = drop_req_at is None or cycle < drop_req_at
        sig = wrapper.tick(MasterSignals(held, request, data), cycle)
        if sig.out_valid:
            beats.append((cycle, sig.data_out))
        if sig.ack:
            return cycle, sig.response, beats
    raise AssertionError("no ack")


@pytest.fixture
def drive_txn():
    return drive


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: exit criteria")


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py::test_criterion_" not in getattr(rep, "nodeid", ""):
                continue
            if rep.when != "call" and outcome == "passed":
                continue
            name = rep.nodeid.split("::", 1)[1]
            verdict = "PASS" if outcome == "passed" else "FAIL"
            # parametrized criteria fail as a whole if any case fails
            if lines.get(name, "PASS") == "FAIL":
                continue
            lines[name] = verdict
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(lines):
        terminalreporter.write_line(f"{lines[name]}  {name}")
