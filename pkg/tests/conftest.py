import time
from contextlib import contextmanager
from types import SimpleNamespace

import pytest

_RESULTS = {}


@contextmanager
def _criterion(label, budget_s):
    """Time a criterion body; fail it if it raises or exceeds its budget."""
    rec = SimpleNamespace(detail="")
    t0 = time.perf_counter()
    try:
        yield rec
    except BaseException:
        _RESULTS[label] = (False, time.perf_counter() - t0, rec.detail)
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed <= budget_s
    _RESULTS[label] = (ok, elapsed, rec.detail)
    assert ok, f"{label}: {elapsed:.2f} s exceeds the {budget_s} s budget"


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: int(s.split()[0][2:])):
        ok, elapsed, detail = _RESULTS[label]
        line = f"{'PASS' if ok else 'FAIL'}  {label}  [{elapsed:.2f} s]"
        if detail:
            line += f"  {detail}"
        terminalreporter.write_line(line)
