"""Shared fixtures: builtin systems and small noise-free snapshot sets."""

import numpy as np
import pytest

from koopman.dynamics import builtin_system, sample_snapshots
from koopman.observables import build_dictionary, custom_dictionary

SEED = 20240611
UNIT_BOX = ((-1.0, 1.0), (-1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def sys1():
    return builtin_system("sys1")


@pytest.fixture(scope="session")
def sys4():
    return builtin_system("sys4")


@pytest.fixture(scope="session")
def linear_dictionary():
    return build_dictionary(2, 1)


@pytest.fixture(scope="session")
def triangular_dictionary():
    return custom_dictionary(["x1", "x2", "x1^2"], 2)


@pytest.fixture(scope="session")
def sys1_snapshots(sys1):
    """200 trajectories x 10 snapshots at T_s = 0.5 and 1.1"""
    return {
        T_s: sample_snapshots(sys1, 200, 10, T_s, UNIT_BOX, SEED)
        for T_s in (0.5, 1.1)
    }
