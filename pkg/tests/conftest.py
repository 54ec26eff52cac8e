from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from pccompare import GroupFactor, sunspots_matrix

DATA = Path(__file__).parent / "data"
PPHPC = DATA / "pphpc"


@pytest.fixture(scope="session")
def sunspots() -> np.ndarray:
    return sunspots_matrix()


@pytest.fixture(scope="session")
def ab_groups() -> GroupFactor:
    return GroupFactor.from_sizes([10, 10])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pphpc_dir() -> Path:
    return PPHPC


_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config) -> None:
    config.addinivalue_line("markers", "criterion(number, summary): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, summary = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        verdict = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        _CRITERIA[number] = (verdict, summary)


def pytest_terminal_summary(terminalreporter) -> None:
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        verdict, summary = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {summary}")
