from datetime import datetime, timedelta

import pytest

from alarmgraph.ingest import AlarmEvent, AlarmLog

T0 = datetime(2019, 3, 7)

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def make_log(pairs) -> AlarmLog:
    """AlarmLog from (tag, seconds after T0) pairs."""
    return AlarmLog.from_unsorted([AlarmEvent(tag, T0 + timedelta(seconds=s)) for tag, s in pairs])


@pytest.fixture
def record_acceptance():
    def record(name: str, ok: bool, detail: str = ""):
        ACCEPTANCE_RESULTS[name] = (ok, detail)
        print(f"\n{'PASS' if ok else 'FAIL'} {name} {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[0].lstrip("AC"))):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
