import pytest

_RESULTS: dict[int, tuple[str, bool, list]] = {}


@pytest.fixture
def criterion():
    """Record named sub-checks for one acceptance criterion and fail if any is false."""

    def record(number: int, title: str, checks: list[tuple[str, bool, str]]):
        ok = all(bool(c[1]) for c in checks)
        _RESULTS[number] = (title, ok, checks)
        failed = [f"{name}: {detail}" for name, good, detail in checks if not good]
        assert ok, "; ".join(failed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok, checks = _RESULTS[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
        for name, good, detail in checks:
            tr.write_line(f"      [{'ok' if good else 'FAIL'}] {name}: {detail}")
