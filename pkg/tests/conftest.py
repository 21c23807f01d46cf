import pytest

from config import parse_config
from models import ExperimentConfig
from teleop_scripts.simulation import PlantParams


def plant(**overrides):
    """X-axis plant at the default operating point, with keyword overrides."""
    values = dict(
        m1=0.5, m2=0.5, b1=12.0, b2=12.0,
        k=200.0, k0=60.0, kc=120.0,
        amplitude=0.05, omega=0.518,
        delta=0.0, dt=0.001,
    )
    values.update(overrides)
    return PlantParams(**values)


@pytest.fixture
def make_params():
    return plant


@pytest.fixture
def default_config():
    return ExperimentConfig()


@pytest.fixture
def small_config():
    """One cell, two trials, noisy, on the X axis."""
    return parse_config(
        "DELAYS_S=0.08\n"
        "STIFFNESS_LEVELS=60\n"
        "AXES=X\n"
        "TRIALS_PER_CELL=2\n"
        "X_SIGMA_X=0.0001\n"
        "X_SIGMA_F=0.05\n"
    )
