import pytest

_RESULTS = []


class Recorder:
    def __call__(self, name, ok, detail=""):
        _RESULTS.append((name, "PASS" if ok else "FAIL", detail))
        return ok

    def skip(self, name, reason):
        _RESULTS.append((name, "SKIP", reason))
        pytest.skip(reason)


@pytest.fixture
def criterion():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _RESULTS:
        terminalreporter.write_line(f"{status} {name}" + (f"  ({detail})" if detail else ""))
