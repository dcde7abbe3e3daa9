import sys
from pathlib import Path

import pytest

from odrlnorm import parse_policy

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))


def load(name):
    return parse_policy((DATA / name).read_text())


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def eq1():
    return load("eq1.json")


@pytest.fixture
def eq2():
    return load("eq2.json")


@pytest.fixture
def age():
    p = load("age.json")
    return p.permissions[0], p.permissions[1]


@pytest.fixture
def pair():
    p = load("pair.json")
    return p.permissions[0], p.permissions[1]


@pytest.fixture
def health():
    return load("health.json")


@pytest.fixture
def read_policy():
    return load("read.json")


ACCEPTANCE = []


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"[{status}] criterion {self.number}: {self.title}"
        if exc_type is not None:
            line += f" ({exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        ACCEPTANCE.append(line)
        print(line)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
