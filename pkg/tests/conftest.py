import mpmath as mp
import pytest

from jumpgue.numerics import PrecisionContext
from jumpgue.weight import WeightParams

# Two-jump parameter sets used throughout: a generic one and the
# indicator-of-an-interval weight (zero outside (s1, s2)).
GENERIC = (1, "-0.5", "0.3", "-0.7", "0.9")
INDICATOR = (0, 1, -1, "-0.7", "0.9")

_acceptance_lines = []


def record_acceptance(line: str) -> None:
    print(line)
    _acceptance_lines.append(line)


@pytest.fixture
def generic():
    return WeightParams(*GENERIC)


@pytest.fixture
def indicator():
    return WeightParams(*INDICATOR)


@pytest.fixture
def ctx512():
    return PrecisionContext(512)


@pytest.fixture(autouse=True)
def _restore_mp_precision():
    prec = mp.mp.prec
    yield
    mp.mp.prec = prec


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


EDGE_TEMPLATE = (1, "-0.5", "0.3")
EDGE_T = ("-1", "-0.5")


@pytest.fixture(scope="session")
def edge_extract():
    """Soft-edge extraction at the reference point, shared by the slow tests (about 20 s)."""
    from jumpgue.softedge import ANALYSIS_CONTEXT, DEFAULT_N_LIST, extract_edge

    return extract_edge(EDGE_TEMPLATE, *EDGE_T, DEFAULT_N_LIST, ANALYSIS_CONTEXT)
