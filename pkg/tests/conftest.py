import numpy as np
import pytest

from synapsim import MosParams


@pytest.fixture
def default_params():
    return MosParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


def box_param_sets():
    """Corner and interior parameter sets of the solver validity box."""
    sets = []
    for n_a in (1e21, 1e23, 1e24):
        for t_si in (5e-9, 10e-9, 20e-9):
            for eot in (0.8e-9, 1.2e-9, 2e-9):
                sets.append(MosParams(n_a=n_a, t_si=t_si, eot=eot))
    return sets
