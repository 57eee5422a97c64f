import os
import sys

import pytest
from hypothesis import settings

from metastable_ac.model import builtin_model

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

SIX_LAYERS = (-3.4, -2.0, -0.5, 0.8, 2.2, 3.2)


@pytest.fixture(scope="session")
def classical():
    return builtin_model("classical")


@pytest.fixture(scope="session")
def mullins():
    return builtin_model("mullins")


@pytest.fixture(scope="session")
def exponential():
    return builtin_model("exponential")


@pytest.fixture(scope="session")
def porous():
    return builtin_model("porous")


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
