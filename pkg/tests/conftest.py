import numpy as np
import pytest

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict line, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def check(number, title, passed, detail):
        lines.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}")
        assert passed, f"criterion {number} failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
