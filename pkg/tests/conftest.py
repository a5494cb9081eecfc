import pytest

from repairidx.corpus import from_gaps
from repairidx.index import compress_index

ALPHA = (1, 2, 1, 2, 1, 4)
BETA = (2, 1, 4, 2, 2)
GAMMA = (1, 2, 1, 2, 2, 2)


def fig1_postings():
    return {
        "alpha": from_gaps(ALPHA, "alpha"),
        "beta": from_gaps(BETA, "beta"),
        "gamma": from_gaps(GAMMA, "gamma"),
    }


def fig1_sequence():
    return [-1, *ALPHA, -2, *BETA, -3, *GAMMA]


@pytest.fixture
def fig1():
    return fig1_postings()


@pytest.fixture
def fig1_index():
    return compress_index(fig1_postings(), 11)
