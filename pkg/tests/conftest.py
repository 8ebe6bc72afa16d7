import numpy as np
import pytest

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict for the terminal summary."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, passed, detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {title} {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        verdict = passed if isinstance(passed, str) else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"[{verdict}] {number:>2}. {title}  {detail}")
