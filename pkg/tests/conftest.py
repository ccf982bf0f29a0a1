import pytest

_RESULTS = []


@pytest.fixture(scope="session")
def check():
    """Record a named pass/fail verdict and assert it.

    Verdicts are replayed as one line each in the terminal summary so a
    full run ends with a readable scoreboard.
    """
    def _check(num: int, name: str, ok, detail: str = ""):
        ok = bool(ok)
        _RESULTS.append((num, name, ok, detail))
        assert ok, f"[{num:02d}] {name}: {detail}"
    return _check


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance checks")
    for num, name, ok, detail in sorted(_RESULTS):
        line = f"[{num:02d}] {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
