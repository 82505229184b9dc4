"""Shared pytest configuration.

Prints one PASS/FAIL line per acceptance criterion at the end of the run
so the acceptance status is visible without digging through the log.
"""

from __future__ import annotations

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match:
                number = int(match.group(1))
                label = match.group(2).replace("_", " ")
                ok = status == "passed" and outcomes.get(number, (True,))[0]
                outcomes[number] = (ok, label)
    if not outcomes:
        return
    writer = terminalreporter
    writer.section("acceptance criteria")
    for number in sorted(outcomes):
        ok, label = outcomes[number]
        writer.write_line(
            "criterion %2d (%s): %s" % (number, label, "PASS" if ok else "FAIL")
        )
