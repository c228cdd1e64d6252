import os
from pathlib import Path

import pytest

from vrcache.traces import synthesize_trace_set


def pytest_addoption(parser):
    parser.addoption("--dataset", default=os.environ.get("VRCACHE_DATASET"),
                     help="root of the ingested head-movement dataset (one directory per video)")
    parser.addoption("--beta", type=float, default=0.5, help="beta for dataset hit-rate checks")


@pytest.fixture(scope="session")
def dataset_root(request):
    root = request.config.getoption("--dataset")
    if not root:
        return None
    path = Path(root)
    return path if path.is_dir() else None


@pytest.fixture(scope="session")
def static_set():
    """32 synthetic sessions, 60 s, static-like movement."""
    return synthesize_trace_set(46.93, 32, 60_000, 11, "static", "static_syn")


@pytest.fixture(scope="session")
def explore_set():
    return synthesize_trace_set(94.09, 32, 60_000, 12, "explore", "explore_syn")


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
