"""Shared pytest plumbing.

The acceptance tests register one verdict per criterion; a terminal-summary
hook prints them as a block at the end of every run so the PASS/FAIL lines
are visible even when pytest swallows per-test stdout.
"""

from __future__ import annotations

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE[number] = (name, passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="=")
    for number in sorted(_ACCEPTANCE):
        name, passed, detail = _ACCEPTANCE[number]
        line = f"ACCEPTANCE {number} ({name}): {'PASS' if passed else 'FAIL'}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
