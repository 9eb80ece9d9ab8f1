import pytest

from objexplore.network import init_network
from objexplore.reference import load_reference_data

# Filled by tests/test_acceptance.py; printed at the end of every run.
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def data():
    return load_reference_data()


@pytest.fixture(scope="session")
def tables(data):
    return data.tables


@pytest.fixture(scope="session")
def fresh(data):
    return init_network(data.tables, data.edges)


@pytest.fixture(scope="session")
def actions(data):
    return {a.name: a for a in data.actions}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
