import os
import sys

import numpy as np
import pytest

from binreg._jit import HAVE_NUMBA

sys.path.insert(0, os.path.dirname(__file__))

PATHS = [pytest.param(False, id="numpy")]
if HAVE_NUMBA:
    PATHS.append(pytest.param(True, id="numba"))


@pytest.fixture(params=PATHS)
def use_numba(request):
    return request.param


@pytest.fixture
def kernel_path(monkeypatch, use_numba):
    """Route every dispatcher through one kernel path via the env flag."""
    if use_numba:
        monkeypatch.delenv("BINREG_DISABLE_NUMBA", raising=False)
    else:
        monkeypatch.setenv("BINREG_DISABLE_NUMBA", "1")
    return use_numba


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance summary -------------------------------------------------------

_ACCEPT = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = getattr(report, "criterion", None)
        if label is None:
            return
        prev = _ACCEPT.get(label)
        ok = report.outcome == "passed"
        _ACCEPT[label] = ok if prev is None else (prev and ok)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args[0]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test checks")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPT:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPT):
        terminalreporter.write_line(f"{'PASS' if _ACCEPT[label] else 'FAIL'}  {label}")
