from __future__ import annotations

import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

# criterion number -> (passed, seconds, detail)
_ACCEPTANCE: dict[int, tuple[bool, float, str]] = {}


class Criterion:
    def __init__(self, number: int, budget: float):
        self.number = number
        self.budget = budget
        self.detail = ""


@contextmanager
def _criterion(number: int, budget: float):
    crit = Criterion(number, budget)
    start = time.perf_counter()
    try:
        yield crit
    except BaseException as exc:
        _ACCEPTANCE[number] = (False, time.perf_counter() - start, f"{type(exc).__name__}: {exc}".splitlines()[0])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    _ACCEPTANCE[number] = (ok, elapsed, crit.detail if ok else f"runtime {elapsed:.2f}s over budget {budget}s")
    assert ok, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"


@pytest.fixture
def criterion():
    return _criterion


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, elapsed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s) {detail}")
