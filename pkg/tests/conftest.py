import contextlib
import time

import pytest

from cbd import gallery

_CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            _CRITERIA[number] = ("FAIL", title, f"{time.perf_counter() - start:.2f}s")
            raise
        _CRITERIA[number] = ("PASS", title, f"{time.perf_counter() - start:.2f}s")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, elapsed = _CRITERIA[number]
        terminalreporter.write_line(f"[{status}] {number:2d}. {title} ({elapsed})")


@pytest.fixture
def kcbs():
    return gallery.kcbs()


@pytest.fixture
def magic():
    return gallery.magic_boxes()
