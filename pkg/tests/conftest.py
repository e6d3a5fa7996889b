from pathlib import Path

import pytest

from groupineq.grouped import read_grouped

DATA = Path(__file__).resolve().parents[1] / "data"

# Example-2 tables do not state the sample size; 5000 per year reproduces
# the reported Wald interval widths.
WA_TOTAL_N = 5000

_acceptance_lines = []


def record(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def table5():
    return read_grouped(DATA / "table5.csv", label="table5")


@pytest.fixture(scope="session")
def wa_tables():
    return [read_grouped(DATA / name, format="percentile-table", lower_bound=0,
                         top_value=5000, total_n=WA_TOTAL_N, label=name)
            for name in ("wa1997.csv", "wa2010.csv")]
