import pytest
from hypothesis import settings

from pointscatter import spectral as sp
from pointscatter.presets import get_preset

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def standard():
    return get_preset("standard")


@pytest.fixture(scope="session")
def irrational():
    return get_preset("irrational")


@pytest.fixture(scope="session")
def std_ctx(standard):
    return sp.make_context(standard, 0.0, 250)


@pytest.fixture(scope="session")
def irr_ctx(irrational):
    return sp.make_context(irrational, 0.0, 250)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
