import pytest

from houghfbp import _backend

# one line per acceptance criterion, printed after the run
CRITERIA = []


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    CRITERIA.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(CRITERIA):
        terminalreporter.write_line(line)


@pytest.fixture(params=_backend.available())
def backend(request):
    """Every available kernel backend."""
    return request.param


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)
