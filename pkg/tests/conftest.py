import sys

import pytest

from stallguard.fixedpoint import QFormat


@pytest.fixture
def q12():
    return QFormat(frac_bits=12, int_bits=4)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s[1:s.index(" ")])):
            terminalreporter.write_line(line)
