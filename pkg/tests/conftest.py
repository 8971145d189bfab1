import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import catalog  # noqa: E402


@pytest.fixture
def d_abs():
    return catalog.d_abs()


@pytest.fixture
def bool_one():
    return catalog.one()


@pytest.fixture
def bool_zero():
    return catalog.zero()


@pytest.fixture(scope="session")
def corpus():
    from generators import generate_corpus
    return generate_corpus(seed=11, count=9, steps=6)
