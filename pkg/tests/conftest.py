import time
from pathlib import Path

import pytest

from minstab import build_3don, build_omega, save_topology

import acceptance_log

FIXTURES = Path(__file__).parent / "fixtures"
_START = time.perf_counter()


@pytest.fixture(scope="session")
def omin():
    return build_omega(16)


@pytest.fixture(scope="session")
def tdon():
    return build_3don(16)


@pytest.fixture(scope="session")
def custom8_path():
    return FIXTURES / "custom8.json"


@pytest.fixture
def topo_files(tmp_path, omin, tdon):
    paths = {"omega": tmp_path / "omega16.json", "3don": tmp_path / "3don16.json"}
    save_topology(omin, paths["omega"])
    save_topology(tdon, paths["3don"])
    return paths


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.summary_lines(time.perf_counter() - _START)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
