import os
from pathlib import Path

import pytest

from declinekit.diagnostics import LogUniform, generate_stationary_corpus

EWD_ENV = "DECLINEKIT_EWD"
POPULATION_ENV = "DECLINEKIT_POPULATION"


@pytest.fixture(scope="session")
def corpus():
    """Stationary raw corpus shaped like the war record: 3 onsets/year, magnitudes 3 to 7."""
    return generate_stationary_corpus((1816, 2007), 3.0, LogUniform(3, 7), seed=20)


def ewd_paths():
    """War CSV and ordered population CSVs supplied through the environment, or None."""
    wars = os.environ.get(EWD_ENV)
    pops = [p for p in os.environ.get(POPULATION_ENV, "").split(os.pathsep) if p]
    if not wars or not Path(wars).is_file() or not pops or not all(Path(p).is_file() for p in pops):
        return None
    return Path(wars), [Path(p) for p in pops]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
