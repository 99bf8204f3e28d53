"""Shared fixtures: angle profiles are expensive to build, so build each once."""

import pytest

from mimo_precode import build_profile, build_x_lookup


@pytest.fixture(scope="session")
def profile4():
    return build_profile(4)


@pytest.fixture(scope="session")
def profile16():
    return build_profile(16)


@pytest.fixture(scope="session")
def profile64():
    return build_profile(64)


@pytest.fixture(scope="session")
def xlookup16():
    return build_x_lookup(16)
