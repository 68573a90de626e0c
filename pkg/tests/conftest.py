import numpy as np
import pytest

from splitrange.experiments import run_experiment

ACCEPTANCE_LINES = []
_REPORTS = {}


def experiment_report(name):
    """Default-parameter report, computed once per session."""
    if name not in _REPORTS:
        _REPORTS[name] = run_experiment(name)
    return _REPORTS[name]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
