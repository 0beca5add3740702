import re
from collections import defaultdict

CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, grouped over its parts."""
    outcome = defaultdict(list)
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call" and key != "error":
                continue
            m = CRITERION.search(rep.nodeid)
            if m:
                outcome[int(m.group(1))].append(key == "passed")
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcome):
        verdict = "PASS" if all(outcome[n]) else "FAIL"
        parts = f"{sum(outcome[n])}/{len(outcome[n])} parts"
        terminalreporter.write_line(f"criterion {n}: {verdict} ({parts})")
