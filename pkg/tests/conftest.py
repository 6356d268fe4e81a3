import pytest

CATMAP = ((2, 1), (1, 1))


@pytest.fixture
def catmap():
    return CATMAP
