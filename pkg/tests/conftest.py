import numpy as np
import pytest

from rankexit.galois import FieldSpec


@pytest.fixture(scope="session")
def gf4():
    return FieldSpec(2)


@pytest.fixture(scope="session")
def gf64():
    return FieldSpec(6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def report(request):
    """Record one acceptance line, print it, and fail the test if it did not pass."""

    def _report(number: int, name: str, passed: bool, detail: str):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
        request.config.stash[_ACCEPTANCE].append(line)
        print(line)
        assert passed, line

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
