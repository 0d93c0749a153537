import numpy as np
import pytest

from swarmdrift import SwarmParams, stationary_cdf
from swarmdrift.angle import FixedPointConfig

STD_TRIPLE = (0.72984, 1.496172, 1.496172)


@pytest.fixture(scope="session")
def cheap_cfg():
    return FixedPointConfig(max_knots=256, eval_knots=1024)


@pytest.fixture(scope="session")
def medium_cfg():
    return FixedPointConfig(max_knots=1024, eval_knots=2048)


@pytest.fixture(scope="session")
def std_params():
    return SwarmParams(*STD_TRIPLE)


@pytest.fixture(scope="session")
def std_stationary(std_params, medium_cfg):
    """Stationary angle CDF for the most common reference triple."""
    F, iterations = stationary_cdf(std_params, medium_cfg)
    return F, iterations


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
