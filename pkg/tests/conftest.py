import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from match_arena.graph_core import ArrivalInstance


def random_instance(rng, n, p):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return ArrivalInstance.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def instance_suite(seed, count, n_lo, n_hi, p_lo=0.15, p_hi=0.9):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        out.append(random_instance(rng, n, rng.uniform(p_lo, p_hi)))
    return out


@st.composite
def arrival_instances(draw, max_n=8, min_n=1):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return ArrivalInstance.from_edges(n, [e for e, b in zip(pairs, bits) if b])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path3():
    return ArrivalInstance.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def triangle():
    return ArrivalInstance.from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def single_edge():
    return ArrivalInstance.from_edges(2, [(0, 1)])
