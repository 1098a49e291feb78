import pytest

from oracles import make_instance


@pytest.fixture
def two_site():
    # hand-enumerable: best is x=(1,1), L=(1,2), G=-5
    return make_instance([-1, -2], [1, 1], [2, 2], [0, 0], [1, 1], 2, 3, 3)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number, title, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  [{number:>2}] {title}: {detail}"
        print(line)
        lines.append((number, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
