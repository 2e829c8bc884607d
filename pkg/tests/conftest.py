import re

ACCEPT = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    status = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            m = ACCEPT.search(getattr(rep, "nodeid", ""))
            if m and rep.when == "call" or (m and key == "error"):
                status[int(m.group(1))] = "PASS" if key == "passed" else "FAIL"
    if not status:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(status):
        terminalreporter.write_line(f"ACCEPTANCE {n}: {status[n]}")
