import pytest

_CRITERIA: dict[int, str] = {}


class CriterionLog:
    """Collects one verdict line per acceptance criterion."""

    def record(self, number: int, title: str, checks: dict[str, bool], elapsed: float, limit: float) -> bool:
        checks = dict(checks)
        checks[f"runtime {elapsed:.2f}s < {limit:g}s"] = elapsed < limit
        ok = all(checks.values())
        failed = [name for name, good in checks.items() if not good]
        detail = f" (failed: {'; '.join(failed)})" if failed else ""
        _CRITERIA[number] = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{elapsed:.2f}s]{detail}"
        print(_CRITERIA[number])
        return ok


@pytest.fixture(scope="session")
def criteria():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
