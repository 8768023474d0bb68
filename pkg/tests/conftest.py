import warnings

import pytest

from fairthresh.ingest import load_fico, table_to_population
from fairthresh.population import synthetic_population


@pytest.fixture(scope="session")
def synthetic():
    return synthetic_population()


@pytest.fixture(scope="session")
def fico_table():
    return load_fico()


@pytest.fixture(scope="session")
def fico(fico_table):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return table_to_population(fico_table)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is not None and module.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(module.LINES):
            terminalreporter.write_line(line)
