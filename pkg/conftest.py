# conftest.py

import random

import pytest
from hypothesis import settings

from modules.exact_core import RingSpec

settings.register_profile("surgerykit", max_examples=40, deadline=None)
settings.load_profile("surgerykit")


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def integers():
    return RingSpec.integers()


@pytest.fixture
def z3():
    """ℤ[ℤ/3]."""
    return RingSpec.cyclic(3)
