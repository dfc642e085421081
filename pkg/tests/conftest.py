import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dropout_mdp.experiments import gen_random_system
from dropout_mdp.mdp_core import FactoredMdp

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def swap_mdp(gamma=0.5, rewards=(1.0, 0.0)):
    """One agent, one action, deterministic 0 <-> 1 swap."""
    T = np.array([[[0.0, 1.0]], [[1.0, 0.0]]])
    return FactoredMdp((2,), (1,), (T,), (np.array([[rewards[0]], [rewards[1]]]),), gamma)


def local_system(n_agents=2, seed=0, size=2, actions=2, gamma=0.9):
    return gen_random_system(n_agents, size, actions, gamma, seed, parents="local")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
