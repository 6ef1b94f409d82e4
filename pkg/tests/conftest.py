import pytest

_criterion_lines: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion for the summary."""
    def _record(num: str, description: str, ok: bool, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        extra = f"  [{detail}]" if detail and not ok else ""
        _criterion_lines.append(f"[criterion {num:>3}] {status}  {description}{extra}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criterion_lines):
            terminalreporter.write_line(line)
