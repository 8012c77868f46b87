"""Shared long orbits, computed once per session."""
import time

import numpy as np
import pytest

from cosmicorbit.operators import EpigraphReciprocal, Halfspace, exp_neg, scalar_prox
from cosmicorbit.orbit import alternating_projections, iterate

ACCEPTANCE_LINES: list[str] = []
SUITE_BUDGET = 60.0  # seconds, for the whole test session
_START = time.perf_counter()


@pytest.fixture(scope="session")
def expneg_orbit():
    return iterate(scalar_prox(exp_neg()), [0.0], 100_000)


@pytest.fixture(scope="session")
def epigraph_pair():
    return Halfspace([0.0, 1.0], 0.0), EpigraphReciprocal(1.0)


@pytest.fixture(scope="session")
def epigraph_ap(epigraph_pair):
    A, B = epigraph_pair
    return alternating_projections(A, B, np.array([1.0, 1.0]), 100_000)


def pytest_sessionfinish(session, exitstatus):
    # only judged when the acceptance module took part in the session
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - _START
    ok = elapsed < SUITE_BUDGET
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] C7t total suite runtime < {SUITE_BUDGET:.0f} s"
                            f" | {elapsed:.1f} s")
    if not ok and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
