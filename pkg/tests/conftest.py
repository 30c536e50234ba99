"""Shared fixtures and random model generators for the suite.

Random chains keep alphabets small (2..4) and sizes nonincreasing so that
surjective one-block maps always exist; weights stay in a moderate band so
no A_i degenerates.  Ball tests need thresholds A_i n / a_1 to sit clearly
away from integers, otherwise a float hair decides whether a word is in a
ball; ball_safe_weights rejection-samples accordingly.
"""
import numpy as np
import pytest
from hypothesis import settings

import affshift as af

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

CARPET_ALPHABETS = (3, 2)
CARPET_MAP = ((0, 0, 1),)
# a_1 = 1/log 3, a_1 + a_2 = 1/log 2: the grid carpet normalization
CARPET_A = (0.9102392266268373, 0.5324558142621261)


@pytest.fixture
def carpet_chain():
    return af.FactorChain(CARPET_ALPHABETS, CARPET_MAP)


@pytest.fixture
def carpet_weights():
    return af.WeightVector(CARPET_A)


@pytest.fixture
def carpet_tilt():
    return af.FiniteDepthPotential(1, 1, np.array([0.0, -0.25, -0.75]))


def random_chain(rng, k=None, max_alphabet=4):
    if k is None:
        k = int(rng.integers(1, 4))
    sizes = sorted(rng.integers(2, max_alphabet + 1, size=k).tolist(), reverse=True)
    maps = []
    for i in range(k - 1):
        src, dst = sizes[i], sizes[i + 1]
        m = list(range(dst)) + rng.integers(0, dst, size=src - dst).tolist()
        rng.shuffle(m)
        maps.append(tuple(int(x) for x in m))
    return af.FactorChain(tuple(sizes), tuple(maps))


def random_weights(rng, k, lo=0.3, hi=1.5):
    return af.WeightVector(tuple(float(x) for x in rng.uniform(lo, hi, size=k)))


def ball_safe_weights(rng, k, n_max=8, margin=1e-4):
    """Weights whose ball thresholds stay `margin` away from integers."""
    while True:
        w = random_weights(rng, k)
        ok = True
        for i in range(2, k + 1):
            for n in range(1, n_max + 1):
                x = w.partial[i - 1] * n / w.a[0]
                if abs(x - round(x)) < margin:
                    ok = False
        if ok:
            return w


def random_depth1(rng, size, scale=1.0):
    return af.FiniteDepthPotential(1, 1, rng.normal(size=size) * scale)


def random_model(rng, k=None, max_alphabet=4):
    chain = random_chain(rng, k=k, max_alphabet=max_alphabet)
    return chain, random_weights(rng, chain.k)
