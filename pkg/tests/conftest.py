import numpy as np
import pytest
from hypothesis import settings, strategies as st

from addcomb import GroupSet, GroupSpec

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SMALL_GROUPS = [(5,), (7,), (12,), (13,), (2, 2), (3, 3), (4, 6), (5, 5), (2, 3, 4), (3, 3, 3)]


@st.composite
def groups(draw, shapes=SMALL_GROUPS):
    return GroupSpec(draw(st.sampled_from(shapes)))


@st.composite
def subsets(draw, g, min_size=0):
    bits = draw(st.lists(st.booleans(), min_size=g.order, max_size=g.order))
    A = GroupSet(g, np.array(bits, dtype=bool))
    if A.size < min_size:
        A = A | GroupSet.from_elements(g, range(min_size))
    return A


@st.composite
def group_and_sets(draw, n=1, min_size=0, shapes=SMALL_GROUPS):
    g = draw(groups(shapes))
    return (g,) + tuple(draw(subsets(g, min_size)) for _ in range(n))


def random_set(g, rng, density):
    return GroupSet(g, rng.random(g.order) < density)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
