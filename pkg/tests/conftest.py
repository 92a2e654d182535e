import warnings

import pytest

from utmsys.errors import ToleranceWarning

_LINES = []


class Recorder:
    """Collects one PASS/FAIL line per acceptance criterion."""

    def __call__(self, number, title, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  [{number:>2}] {title}"
        if detail:
            line += f"  ({detail})"
        _LINES.append(line)
        print(line)
        assert passed, line


@pytest.fixture(scope="session")
def criterion():
    return Recorder()


@pytest.fixture(autouse=True)
def _quiet_tolerance_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
