import pytest

from holopar.fixtures import (euclidean_flat, rotated_blend,
                              scaled_euclidean_incompatible, section5_example)


@pytest.fixture(scope="session")
def s5():
    return section5_example()


@pytest.fixture(scope="session")
def flat2():
    return euclidean_flat()


@pytest.fixture(scope="session")
def scaled():
    return scaled_euclidean_incompatible()


@pytest.fixture(scope="session")
def blend():
    return rotated_blend()
