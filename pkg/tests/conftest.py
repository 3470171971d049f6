"""Shared fixtures plus the acceptance-criteria summary lines."""

from pathlib import Path

import pytest

from transcheck.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def cli(capsys, monkeypatch):
    """Run the command line entry point; returns (exit_code, stdout, stderr)."""
    monkeypatch.setenv("TRANSCHECK_FIXTURES", str(FIXTURES))

    def run(*args: str):
        code = main(list(args))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run


# one PASS/FAIL line per acceptance criterion at the end of the run

_outcomes: dict[int, bool] = {}


def _criterion_number(nodeid: str) -> int | None:
    if "test_acceptance.py::test_criterion_" not in nodeid:
        return None
    tail = nodeid.split("test_criterion_", 1)[1]
    digits = tail.split("_", 1)[0]
    return int(digits) if digits.isdigit() else None


def pytest_runtest_logreport(report):
    num = _criterion_number(report.nodeid)
    if num is None:
        return
    if report.when == "call":
        _outcomes[num] = report.passed
    elif report.failed:  # setup or teardown error
        _outcomes[num] = False


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_outcomes):
        word = "PASS" if _outcomes[num] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {num}: {word}")
