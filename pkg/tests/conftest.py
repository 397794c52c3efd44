import numpy as np
import pytest

from credaltrace.bayesnet import BayesNet
from credaltrace.graph import Dag


@pytest.fixture
def chain2():
    """X0 -> X1, binary, p(x0=1)=0.3, p(x1=1|x0=0)=0.6, p(x1=1|x0=1)=0.8."""
    g = Dag((2, 2), ((0, 1),), (0, 1))
    return BayesNet(g, (np.array([[0.7, 0.3]]), np.array([[0.4, 0.6], [0.2, 0.8]])))


@pytest.fixture
def collider():
    return Dag.from_edges((2, 2, 2), [(0, 2), (1, 2)])


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one verdict line per acceptance criterion for the terminal summary."""
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
