import numpy as np
import pytest

from forced_invariants import OscillatorParams


@pytest.fixture
def nonresonant():
    return OscillatorParams(m=1.0, omega=1.0, lam=0.0, amp=1.0, cap_omega=2.0)


@pytest.fixture
def resonant():
    return OscillatorParams(m=1.0, omega=1.0, lam=0.0, amp=1.0, cap_omega=1.0)


@pytest.fixture
def damped():
    return OscillatorParams(m=1.0, omega=1.0, lam=0.1, amp=1.0, cap_omega=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


# --- acceptance reporting -------------------------------------------------------

import time

WALL_CLOCK_LIMIT = 60.0


def pytest_sessionstart(session):
    session.config._acceptance_lines = []
    session.config._t_start = time.perf_counter()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for a criterion, then assert it."""
    lines = request.config._acceptance_lines

    def check(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if not lines:
        return
    elapsed = time.perf_counter() - config._t_start
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    ok = elapsed < WALL_CLOCK_LIMIT
    terminalreporter.write_line(
        f"[{'PASS' if ok else 'FAIL'}] wall clock: {elapsed:.1f} s (limit {WALL_CLOCK_LIMIT:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    t0 = getattr(session.config, "_t_start", None)
    if t0 is not None and time.perf_counter() - t0 >= WALL_CLOCK_LIMIT and exitstatus == 0:
        session.exitstatus = 1
