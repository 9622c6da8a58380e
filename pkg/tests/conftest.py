import re

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m or rep.when not in ("call", "setup"):
                continue
            key = (int(m.group(1)), m.group(2))
            if outcome == "passed" and rep.when == "call":
                results.setdefault(key, "PASS")
            elif outcome != "passed":
                results[key] = "FAIL"
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), status in sorted(results.items()):
        terminalreporter.write_line(f"criterion {num:2d} {name.replace('_', ' ')}: {status}")
