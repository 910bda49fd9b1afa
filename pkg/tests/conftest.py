import numpy as np
import pytest
from hypothesis import settings

# derandomized: every run draws the same examples
settings.register_profile("fixed", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("fixed")

SEED = 20240617


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


# acceptance criteria report: one line per criterion in the terminal summary
_CRITERIA = []


@pytest.fixture
def criterion():
    def report(number, ok, detail):
        line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA, key=lambda t: t[0]):
            terminalreporter.write_line(line)
