import numpy as np
import pytest

from quickdiag import BoxSet, DistPair, GaussianId, UncertaintyModel, UpsilonSet

ACCEPTANCE_LINES = []


def G(v, dim=2):
    return GaussianId([v] * dim)


@pytest.fixture
def sets():
    return [
        BoxSet([None, None], [0.0, 0.0]),
        BoxSet([0.4, 0.4], [0.8, 0.8]),
        BoxSet([1.5, 1.5], [None, None]),
    ]


@pytest.fixture
def robust_pairs():
    return UpsilonSet({
        (0, 1): DistPair(G(0.0), G(0.4)),
        (0, 2): DistPair(G(0.0), G(1.5)),
        (1, 2): DistPair(G(0.8), G(1.5)),
        (2, 1): DistPair(G(1.5), G(0.8)),
    })


@pytest.fixture
def lfds():
    return [G(0.0), G(0.4), G(1.5)]


@pytest.fixture
def model(sets, robust_pairs, lfds):
    return UncertaintyModel(sets, robust_pairs, lfds)


@pytest.fixture
def rng():
    return np.random.default_rng(20201)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
