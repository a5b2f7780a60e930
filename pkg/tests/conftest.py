import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pancrad.volume import Mask, Volume  # noqa: E402

_acceptance = []


def grid(data, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0), orientation=None, cls=Volume):
    return cls(np.asarray(data), spacing, origin, np.eye(3) if orientation is None else orientation)


@pytest.fixture
def make_volume():
    return grid


@pytest.fixture
def make_mask():
    return lambda data, **kw: grid(data, cls=Mask, **kw)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    from pancrad.phantom import generate_dataset
    out = tmp_path_factory.mktemp("phantom")
    generate_dataset(6, 5, 11, out)
    return out


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
