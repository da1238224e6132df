import pytest

_LINES = []


class CriterionLog:
    """Collects one status line per acceptance check; printed in the terminal summary."""

    def check(self, criterion, label, residual, tolerance, expect_fail=False):
        ok = bool(residual <= tolerance)
        if expect_fail:
            status = "XFAIL" if not ok else "XPASS"
        else:
            status = "PASS" if ok else "FAIL"
        _LINES.append(f"[{status}] criterion {criterion}: {label}: residual {residual:.3e} (tol {tolerance:.1e})")
        return ok


@pytest.fixture
def criterion_log():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)
