import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from simplexts.models import DirichletFiniteSpec, DirichletODSpec, LogisticNormalFiniteSpec, LogisticNormalODSpec

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# the simulation design used throughout the study tests
STUDY_A0 = [-1.0, -2.0]
STUDY_A1 = [[4.0, 3.0], [3.0, 5.0]]
STUDY_A0_DISP = 1.5
STUDY_A1_DISP = 0.7


@pytest.fixture
def study_spec():
    return DirichletFiniteSpec(STUDY_A0, [STUDY_A1], STUDY_A0_DISP, [STUDY_A1_DISP])


@pytest.fixture
def od_spec():
    return DirichletODSpec([-0.5, -1.0], [[2.0, 1.0], [0.5, 2.5]], [[0.3, 0.1], [0.0, 0.4]], 1.0, 0.6, 0.5)


@pytest.fixture
def ln_finite_spec():
    return LogisticNormalFiniteSpec([0.2, -0.3], [[[1.0, 0.5], [-0.5, 1.0]]], [0.4], V=[[1.0, 0.3], [0.3, 0.8]])


@pytest.fixture
def ln_od_spec():
    return LogisticNormalODSpec([0.2, -0.3], [[1.0, 0.5], [-0.5, 1.0]], [[0.3, 0.0], [0.1, 0.2]], 0.5, 0.4,
                                V=[[1.0, 0.3], [0.3, 0.8]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_compositions(rng, n, d, conc=2.0):
    return rng.dirichlet(np.full(d, conc), size=n)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
