import pytest

from omnisim.params import load_params


@pytest.fixture(scope="session")
def bundle():
    return load_params()


@pytest.fixture(scope="session")
def robot(bundle):
    return bundle.robot


@pytest.fixture(scope="session")
def motor(bundle):
    return bundle.motor


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one pass/fail line for an acceptance criterion, then return the flag for asserting."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
