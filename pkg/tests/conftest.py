from __future__ import annotations

import pytest

from fujitalab.drift import make_drift
from fujitalab.geometry import make_model_manifold


@pytest.fixture(scope="session")
def euclid3():
    return make_model_manifold("euclidean", 3)


@pytest.fixture(scope="session")
def hyp3():
    return make_model_manifold("hyperbolic", 3, 1.0)


@pytest.fixture(scope="session")
def hyp2():
    return make_model_manifold("hyperbolic", 2, 1.0)


@pytest.fixture(scope="session")
def ricci3():
    return make_model_manifold("ricci_decay", 3, 2.0)


@pytest.fixture(scope="session")
def no_drift():
    return make_drift("none")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0].split("-")[1])):
            terminalreporter.write_line(line)
