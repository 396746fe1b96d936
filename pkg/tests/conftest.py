"""Shared fixtures: the two hand-checked instances and an acceptance summary.

I2 is the smallest instance with two stable matchings (one rotation); I3 is
the 3x3 Latin-square instance whose three stable matchings form a chain of
two rotations.  Both are kept as on-disk files so the CLI tests exercise the
same bytes the library tests do.
"""

from __future__ import annotations

import re
from pathlib import Path

import pytest

from robustmatch import parse_instance

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance: dict[str, str] = {}


@pytest.fixture(scope="session")
def i2_path() -> Path:
    return FIXTURES / "I2.txt"


@pytest.fixture(scope="session")
def i3_path() -> Path:
    return FIXTURES / "I3.txt"


@pytest.fixture(scope="session")
def i2(i2_path):
    return parse_instance(i2_path.read_text())


@pytest.fixture(scope="session")
def i3(i3_path):
    return parse_instance(i3_path.read_text())


def pytest_runtest_logreport(report):
    match = re.search(r"::test_(a\d)_", report.nodeid)
    if match and report.when == "call":
        _acceptance[match.group(1).upper()] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for criterion in sorted(_acceptance):
        outcome = "PASS" if _acceptance[criterion] == "passed" else "FAIL"
        terminalreporter.write_line(f"{criterion} {outcome}")
