import os

import pytest

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def chi4_zeros():
    return os.path.join(DATA, "chi4_zeros.csv")
