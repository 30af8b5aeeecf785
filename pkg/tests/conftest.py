import random

import pytest

from turmite_pu.core import SparseConfig, invert
from turmite_pu.machines import build_M, build_barM


@pytest.fixture(scope="session")
def barM():
    return build_barM()


@pytest.fixture(scope="session")
def M():
    return build_M()


@pytest.fixture(scope="session")
def Minv(M):
    return invert(M)


@pytest.fixture()
def rng():
    return random.Random(0xA5A5)


def random_config(rng, states="NESW", span=5, count=None, background=0,
                  head_span=3):
    ones = frozenset(
        (rng.randrange(-span, span + 1), rng.randrange(-span, span + 1))
        for _ in range(count if count is not None
                       else rng.randrange(0, 2 * span)))
    head = (rng.choice(states),
            (rng.randrange(-head_span, head_span + 1),
             rng.randrange(-head_span, head_span + 1)))
    return SparseConfig(ones, background, head)
