import numpy as np
import pytest

from slantmap.scenario import load_builtin
from helpers import ex31_map, ex41_map


@pytest.fixture(scope="session")
def ex31():
    return ex31_map()


@pytest.fixture(scope="session")
def ex41():
    return ex41_map()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ex31_scenario():
    return load_builtin("ex3_1")


@pytest.fixture(scope="session")
def ex41_scenario():
    return load_builtin("ex4_1")


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
