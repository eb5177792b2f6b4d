import numpy as np
import pytest

from vbht.experiments import ExperimentGrid, rejection_table
from vbht.model import Hyperparameters

# acceptance criterion -> "PASS/FAIL  detail", printed at the end of the run
ACCEPTANCE_LINES: dict[str, str] = {}

NULL_RATE_SIZES = (100, 200, 400, 800)
NULL_RATE_LEVELS = (0.10, 0.05, 0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def null_rate_rows():
    """Full null rejection table: phi = 20, sigma2 = 1, 5000 trials per n, seed 0."""
    grid = ExperimentGrid(
        sample_sizes=NULL_RATE_SIZES,
        trials=5000,
        levels=NULL_RATE_LEVELS,
        hyper=Hyperparameters(20.0, 1.0),
        master_seed=0,
        threads=0,
    )
    return rejection_table(grid)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{key}] {ACCEPTANCE_LINES[key]}")
