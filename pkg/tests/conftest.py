import pytest

from macroq import interferometry as itf
from macroq.phys_core import CONST, default_state, get_material

AMU = CONST.amu


@pytest.fixture
def m9():
    return 1e9 * AMU


@pytest.fixture
def grating():
    return itf.GratingConfig(200e-9, 1e-3, 4.2)


@pytest.fixture
def timing20():
    """Asymmetric split used for the 1e9 amu figures (mu = 5)."""
    return itf.TimingConfig(20.0, 80.0)


@pytest.fixture
def state9(m9):
    return default_state(m9)


@pytest.fixture
def silica():
    return get_material("fused_silica")


@pytest.fixture
def hafnia():
    return get_material("hafnia")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
