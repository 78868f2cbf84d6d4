import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per numbered acceptance criterion."""
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            match = _CRITERION_PATTERN.search(getattr(rep, "nodeid", ""))
            if match:
                num = int(match.group(1))
                ok = status == "passed" and outcomes.get(num, True)
                outcomes[num] = ok
    if not outcomes:
        return
    try:
        import test_acceptance

        descriptions = test_acceptance.CRITERIA
    except Exception:
        descriptions = {}
    terminalreporter.section("acceptance criteria")
    for num in sorted(outcomes):
        verdict = "PASS" if outcomes[num] else "FAIL"
        desc = descriptions.get(num, "")
        terminalreporter.write_line(f"criterion {num:2d}: {verdict} — {desc}")
