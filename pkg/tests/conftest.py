from __future__ import annotations

import functools

import pytest

from feigenbaum.deltasolver import solve_delta
from feigenbaum.gsolver import solve_g

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def g_run(n: int):
    return solve_g(n)


@functools.lru_cache(maxsize=None)
def delta_run(n: int):
    sol = g_run(n)
    return solve_delta(sol.series, n, ctx=sol.ctx)


@pytest.fixture(scope="session")
def runs():
    """Cached pipeline runs keyed by n: ``runs.g(n)``, ``runs.delta(n)``."""

    class _Runs:
        g = staticmethod(g_run)
        delta = staticmethod(delta_run)

    return _Runs


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
