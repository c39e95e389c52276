import os
import sys

import pytest

from aekit.economy import parse_problem
from aekit.reductions import parse_gnep

DATA = os.path.join(os.path.dirname(__file__), "data")
sys.path.insert(0, os.path.dirname(__file__))


def data_path(name):
    return os.path.join(DATA, name)


def read(name):
    with open(data_path(name), encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture
def e1():
    return parse_problem(read("e1.json"))


@pytest.fixture
def e1_shrunk():
    return parse_problem(read("e1_shrunk.json"))


@pytest.fixture
def pd():
    return parse_gnep(read("pd.json"))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
