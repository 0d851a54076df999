import warnings

import numpy as np
import pytest

from memflow import Profile, QuadratureSpec, SolverConfig, SphereQuadSpec, solve_memory


@pytest.fixture(scope="session")
def short_run():
    """A small but genuine memory solve shared by bound checks."""
    profile = Profile(dimension=3)
    config = SolverConfig(
        profile=profile,
        xi0=np.array([1.0, 0.0, 0.0]),
        horizon=0.25,
        dt=1.0 / 64,
        h=0.2,
        quad=QuadratureSpec.for_profile(profile, 1e-9, eta_nodes_per_axis=96),
        squad=SphereQuadSpec(),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = solve_memory(config)
    return traj, config
