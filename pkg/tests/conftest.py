import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_report  # noqa: E402

settings.register_profile("pmglfa", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("pmglfa")


def pytest_terminal_summary(terminalreporter):
    if not acceptance_report.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_report.LINES:
        terminalreporter.write_line(line)
