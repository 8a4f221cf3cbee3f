import pytest


class AcceptanceLog:
    def __init__(self):
        self.lines: dict[int, str] = {}

    def record(self, n: int, ok: bool, detail: str) -> None:
        self.lines[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(self.lines[n])


@pytest.fixture(scope="session")
def acceptance(request):
    if not hasattr(request.config, "_acceptance"):
        request.config._acceptance = AcceptanceLog()
    return request.config._acceptance


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_acceptance", None)
    if log is None or not log.lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log.lines):
        terminalreporter.write_line(log.lines[n])
