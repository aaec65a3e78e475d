import pytest


@pytest.fixture
def record_criterion(request):
    lines = request.config.__dict__.setdefault("_tfinv_acceptance", {})

    def record(number, ok, text):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        lines[number] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_tfinv_acceptance")
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
