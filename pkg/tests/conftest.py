"""Shared fixtures: the standard corpus solved once per session."""

import numpy as np
import pytest

from halfline.direct import DirectConfig, solve_direct
from halfline.inverse import InverseConfig, invert
from halfline.oracles import standard_fixtures


@pytest.fixture(scope="session")
def direct_config():
    return DirectConfig()


@pytest.fixture(scope="session")
def inverse_config():
    return InverseConfig(x_max=12.0)


@pytest.fixture(scope="session")
def corpus():
    """name -> (potential, boundary) for the standard fixture set."""
    return {name: (pot, bc) for name, pot, bc in standard_fixtures()}


@pytest.fixture(scope="session")
def solved(corpus, direct_config):
    """name -> (data, bundle): the direct transform of every fixture."""
    return {
        name: solve_direct(pot, bc, direct_config)
        for name, (pot, bc) in corpus.items()
    }


@pytest.fixture(scope="session")
def inverted(solved, inverse_config):
    """name -> InverseResult: the inverse transform of every fixture."""
    return {
        name: invert(data, inverse_config) for name, (data, _) in solved.items()
    }


@pytest.fixture(scope="session")
def resolved(inverted, direct_config):
    """name -> ScatteringData of the reconstructed (V, A, B)."""
    return {
        name: solve_direct(res.potential, res.boundary, direct_config)[0]
        for name, res in inverted.items()
    }
