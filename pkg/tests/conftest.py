import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("lhsac", max_examples=60, deadline=None)
settings.load_profile("lhsac")

ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Acceptance tests call this with (label, passed, detail) before asserting."""

    def _record(label: str, passed: bool, detail: str = "") -> None:
        ACCEPTANCE_LINES.append((label, bool(passed), detail))

    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_LINES:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {label}  {detail}")
