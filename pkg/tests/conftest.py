import pytest

from rewardforge.envs import CARTPOLE_SPEC, MOUNTAINCAR_SPEC, make_env


@pytest.fixture
def cartpole():
    return make_env("cartpole")


@pytest.fixture
def mountaincar():
    return make_env("mountaincar")


@pytest.fixture
def cartpole_spec():
    return CARTPOLE_SPEC


@pytest.fixture
def mountaincar_spec():
    return MOUNTAINCAR_SPEC
