import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import corpus  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not corpus.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in corpus.ACCEPTANCE:
        terminalreporter.write_line(line)
