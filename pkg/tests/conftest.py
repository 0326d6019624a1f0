import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance verdict table after the run, one line per criterion."""
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None) if mod else None
    if results:
        terminalreporter.write_line("")
        terminalreporter.write_line("=== acceptance criteria ===")
        for line in results:
            terminalreporter.write_line(line)
