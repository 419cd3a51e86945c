import sys
from pathlib import Path

# helper modules (worked_states, solver_cache, acceptance_log) sit next to the tests
sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(acceptance_log.LINES, key=lambda s: s.split("]")[0].split("[")[1]):
        terminalreporter.write_line(line)
