import numpy as np
import pytest
from hypothesis import settings

from rigid_waring.waring import WaringPolynomial

settings.register_profile("repo", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def conic():
    """x0^2 - x1^2 - x2^2 written as a sum of three squares."""
    return WaringPolynomial(2, [[1, 0, 0], [0, 1j, 0], [0, 0, 1j]])


@pytest.fixture
def conic_probes():
    """The four probe vectors of the worked estimator example."""
    return np.array([
        [0.4275 - 0.6339j, -0.3085 + 0.1682j, -0.4613 - 0.0327j],
        [-0.1376 + 0.3953j, -0.6960 - 0.4021j, -0.2992 - 0.0088j],
        [-0.1258 - 0.1158j, 0.5414 - 0.3448j, 0.1793 - 0.4512j],
        [-0.0942 - 0.7393j, -0.1586 - 0.3602j, 0.2997 + 0.2197j],
    ])


_CRITERIA: list = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""
    def report(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
