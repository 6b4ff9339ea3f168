import logging

import pytest

from kvnlab.phase_space import make_grid


@pytest.fixture(autouse=True)
def _quiet_guard_warnings(caplog):
    # the splitting accuracy guard is advisory and fires on most desk-scale grids
    caplog.set_level(logging.ERROR, logger="kvnlab")


@pytest.fixture
def tiny():
    return make_grid(16, 16, -4.0, 4.0, -4.0, 4.0)


@pytest.fixture
def small():
    return make_grid(64, 64, -8.0, 8.0, -8.0, 8.0)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULT_LINES

    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
