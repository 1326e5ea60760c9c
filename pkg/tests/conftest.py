import sys


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS and not _ran_acceptance(terminalreporter):
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)


def _ran_acceptance(terminalreporter):
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if "test_acceptance" in getattr(rep, "nodeid", ""):
                return True
    return False
