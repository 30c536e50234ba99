import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import affshift as af
from affshift.errors import ModelError

from conftest import CARPET_A, ball_safe_weights, random_chain, random_weights


def test_word_basics():
    w = af.Word.of(1, [0, 2, 1])
    assert len(w) == 3
    assert w[1] == 2
    assert w.symbols == (0, 2, 1)
    assert w.level == 1


def test_chain_validation():
    af.FactorChain((3, 2), ((0, 0, 1),))  # fine
    with pytest.raises(ModelError):
        af.FactorChain((3, 2), ((0, 0, 0),))  # not surjective
    with pytest.raises(ModelError):
        af.FactorChain((3, 2), ((0, 1),))  # not total
    with pytest.raises(ModelError):
        af.FactorChain((3, 2), ((0, 0, 2),))  # out of range
    with pytest.raises(ModelError):
        af.FactorChain((3, 2), ())  # missing map


def test_weight_validation():
    af.WeightVector((1.0, 0.0))  # zero tail weight is allowed
    with pytest.raises(ModelError):
        af.WeightVector(())
    with pytest.raises(ModelError):
        af.WeightVector((0.0, 1.0))
    with pytest.raises(ModelError):
        af.WeightVector((1.0, -0.1))


@given(st.integers(0, 10_000))
def test_tau_tables_compose(seed):
    rng = np.random.default_rng(seed)
    chain = random_chain(rng)
    for i in range(chain.k - 1):
        fm = np.asarray(chain.factor_maps[i])
        assert np.array_equal(chain.tau_table(i + 1), fm[chain.tau_table(i)])
    for j in range(1, chain.k + 1):
        assert np.array_equal(chain.map_between(1, j), chain.tau_table(j - 1))


@given(st.integers(0, 10_000))
def test_fibers_partition_alphabet(seed):
    rng = np.random.default_rng(seed)
    chain = random_chain(rng)
    for i in range(1, chain.k):
        fib = chain.fibers(i)
        flat = sorted(s for f in fib for s in f)
        assert flat == list(range(chain.alphabet_sizes[i - 1]))
        assert all(len(f) >= 1 for f in fib)


def test_constraint_length_carpet_values():
    w = af.WeightVector(CARPET_A)
    # level 1 always matches the radius index exactly
    assert af.constraint_length(12, 1, w) == 12
    # A_2 / a_1 = log 3 / log 2; 12 log 3 / log 2 = 19.02, 7 * it = 11.09
    assert af.constraint_length(12, 2, w) == 20
    assert af.constraint_length(7, 2, w) == 12
    assert af.constraint_length(0, 2, w) == 0
    assert af.constraint_length(5, 0, w) == 0


def test_constraint_length_snaps_equal_weights():
    # a_1 = a_2 makes every threshold an exact integer multiple
    w = af.WeightVector((0.7, 0.7))
    for n in range(0, 30):
        assert af.constraint_length(n, 2, w) == 2 * n


@given(st.integers(0, 10_000), st.integers(0, 12))
def test_constraint_length_monotone(seed, n):
    rng = np.random.default_rng(seed)
    w = random_weights(rng, int(rng.integers(1, 4)))
    lens = [af.constraint_length(n, i, w) for i in range(len(w.a) + 1)]
    assert lens[0] == 0
    assert all(b >= a for a, b in zip(lens, lens[1:]))
    if n >= 1:
        assert lens[1] == n
        nxt = [af.constraint_length(n + 1, i, w) for i in range(len(w.a) + 1)]
        assert all(b >= a for a, b in zip(lens, nxt))


@given(st.integers(0, 10_000))
def test_metric_is_ultrametric(seed):
    rng = np.random.default_rng(seed)
    chain = random_chain(rng)
    w = random_weights(rng, chain.k)
    n1 = chain.alphabet_sizes[0]
    x, y, z = (af.Word.of(1, rng.integers(0, n1, size=9)) for _ in range(3))
    dxy = af.self_affine_metric(chain, w, x, y)
    dyx = af.self_affine_metric(chain, w, y, x)
    dxz = af.self_affine_metric(chain, w, x, z)
    dyz = af.self_affine_metric(chain, w, y, z)
    assert dxy == dyx
    assert 0.0 < dxy <= 1.0
    assert dxz <= max(dxy, dyz) + 1e-15
    if x.symbols[0] != y.symbols[0]:
        assert dxy == 1.0


@given(st.integers(0, 10_000), st.integers(1, 6))
def test_ball_membership_matches_metric(seed, n):
    rng = np.random.default_rng(seed)
    chain = random_chain(rng)
    w = ball_safe_weights(rng, chain.k, n_max=n)
    n1 = chain.alphabet_sizes[0]
    depth = af.constraint_length(n, chain.k, w)
    x = af.Word.of(1, rng.integers(0, n1, size=depth))
    shape = af.ball_shape(chain, w, x, n)
    assert shape.lengths()[-1] == depth
    r = math.exp(-n / w.a[0])
    for _ in range(25):
        y = af.Word.of(1, rng.integers(0, n1, size=depth))
        inside = af.self_affine_metric(chain, w, x, y) <= r
        assert shape.contains(chain, y) == inside


@given(st.integers(0, 10_000), st.integers(1, 6))
def test_ball_enumeration_is_exact(seed, n):
    rng = np.random.default_rng(seed)
    chain = random_chain(rng, max_alphabet=3)
    w = ball_safe_weights(rng, chain.k, n_max=n)
    n1 = chain.alphabet_sizes[0]
    depth = af.constraint_length(n, chain.k, w)
    if n1**depth > 20_000:
        return
    x = af.Word.of(1, rng.integers(0, n1, size=depth))
    shape = af.ball_shape(chain, w, x, n)
    words = list(shape.enumerate_words(chain))
    assert len(set(w_.symbols for w_ in words)) == len(words)
    expect = np.prod([len(f) for f in shape.position_fibers(chain)], dtype=float)
    assert len(words) == int(expect)
    member = {w_.symbols for w_ in words}
    for combo in itertools.product(range(n1), repeat=depth):
        y = af.Word.of(1, combo)
        assert (combo in member) == shape.contains(chain, y)


def test_project_word_carpet():
    chain = af.FactorChain((3, 2), ((0, 0, 1),))
    w = af.Word.of(1, [0, 1, 2, 2])
    assert af.project_word(chain, 0, w) == w
    assert af.project_word(chain, 1, w) == af.Word.of(2, [0, 0, 1, 1])
    with pytest.raises(ModelError):
        af.project_word(chain, 2, w)
