import os

# keep runs reproducible and bounded regardless of the host core count
os.environ.setdefault("PUCCI_ASYM_THREADS", "4")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
