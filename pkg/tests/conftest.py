import os
import time
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("fast", max_examples=10, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def wmdmon():
    from disorderly.games import builtin_wmdmon

    return builtin_wmdmon()


@pytest.fixture
def wminit():
    from disorderly.games import builtin_wminit

    return builtin_wminit()


@pytest.fixture
def winmove():
    from disorderly.games import builtin_winmove

    return builtin_winmove()


# acceptance criteria report ------------------------------------------------------

ACCEPTANCE: list[str] = []


class _Criterion:
    def __init__(self, number: int, title: str, limit: float):
        self.number, self.title, self.limit = number, title, limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        ok = exc_type is None and elapsed < self.limit
        status = "PASS" if ok else "FAIL"
        ACCEPTANCE.append(
            f"criterion {self.number:>2} {status} {elapsed:6.2f}s (limit {self.limit:g}s) {self.title}"
        )
        if exc_type is None and not ok:
            raise AssertionError(f"criterion {self.number} took {elapsed:.2f}s, limit {self.limit}s")
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
