import math

import numpy as np
import pytest

from lineinv import darboux, dispersion, inverse
from lineinv.potentials import SquareWell

EPSILONS = {"5": 5.0, "pi2": math.pi ** 2, "20": 20.0, "130": 130.0}


@pytest.fixture(scope="session")
def pipelines():
    """Full inverse pipeline for each worked square well, computed once."""
    return {key: inverse.run_pipeline(dispersion.SquareWellModel(eps))
            for key, eps in EPSILONS.items()}


@pytest.fixture(scope="session")
def exceptional_pair():
    """The pi^2 well stripped of its bound state, and its sign-flip partner."""
    V1 = darboux.remove_bound_state(SquareWell(math.pi ** 2))
    return V1, darboux.signflip_partner(V1)


@pytest.fixture(scope="session")
def soliton():
    from lineinv.potentials import zero_potential
    V0 = zero_potential()
    V1, step = darboux.add_bound_state(V0, 1.0, 1.0)
    return V0, V1, step


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
