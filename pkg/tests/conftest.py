import numpy as np
import pytest

from nullwv.hilbert import StateVector, Unitary
from nullwv.partial_collapse import PartialCollapseConfig

THETA = np.pi / 6


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def tilted_state():
    return StateVector.qubit(THETA)


@pytest.fixture
def benchmark():
    """i = cos(pi/6)|0> + sin(pi/6)|1>, p = (0, 0.2), U = 1, postselect on |1>."""
    return PartialCollapseConfig((0.0, 0.2)), StateVector.qubit(THETA), Unitary.identity(2), 1


def postselection(gamma):
    """|f> = cos(g)|0> - sin(g)|1>."""
    return StateVector(np.array([np.cos(gamma), -np.sin(gamma)]))


def random_instance(rng, dim=None):
    """Random (cfg, i, U, m) protocol instance with random probs, phases and Haar U."""
    from nullwv.hilbert import random_state, random_unitary

    dim = dim or int(rng.integers(2, 9))
    cfg = PartialCollapseConfig(tuple(rng.uniform(0, 1, dim)), tuple(rng.uniform(-np.pi, np.pi, dim)))
    return cfg, random_state(dim, rng), random_unitary(dim, rng), int(rng.integers(0, dim))


# -- acceptance reporting -----------------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion; reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], report.outcome.upper(), item.name))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, name in sorted(_ACCEPTANCE):
        status = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"[{status}] {label} ({name})")
