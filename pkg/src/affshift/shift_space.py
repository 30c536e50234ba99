"""Chains of full shifts, one-block factor maps, words, balls and the metric.

Levels are numbered 1..k.  Level 1 is the finest alphabet; level i+1 is the
image of level i under the i-th one-block factor map.  Symbols are dense
integer codes 0..size-1 at every level.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ModelError

_INT_SNAP = 1e-9  # relative slack when a length threshold sits on an integer


@dataclass(frozen=True)
class Word:
    """A finite word over the alphabet of one level of the chain."""

    level: int
    symbols: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, idx):
        return self.symbols[idx]

    @staticmethod
    def of(level: int, symbols) -> "Word":
        return Word(level, tuple(int(s) for s in symbols))


@dataclass(frozen=True)
class FactorChain:
    """Alphabet sizes per level plus the one-block maps between them.

    factor_maps[i][s] is the level-(i+2) image of level-(i+1) symbol s.
    Each map must be total and surjective: a factor of a full shift is a
    full shift, and empty fibers would break every fiber sum downstream.
    """

    alphabet_sizes: tuple[int, ...]
    factor_maps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.alphabet_sizes) < 1:
            raise ModelError("chain needs at least one level")
        if any(n < 1 for n in self.alphabet_sizes):
            raise ModelError("alphabet sizes must be positive")
        if len(self.factor_maps) != len(self.alphabet_sizes) - 1:
            raise ModelError("need exactly k-1 factor maps for k levels")
        for i, fm in enumerate(self.factor_maps):
            src, dst = self.alphabet_sizes[i], self.alphabet_sizes[i + 1]
            if len(fm) != src:
                raise ModelError(f"factor map {i} is not total on level {i + 1}")
            if any(not (0 <= t < dst) for t in fm):
                raise ModelError(f"factor map {i} has out-of-range targets")
            if set(fm) != set(range(dst)):
                raise ModelError(f"factor map {i} is not surjective")

    @property
    def k(self) -> int:
        return len(self.alphabet_sizes)

    @cached_property
    def _tau_tables(self) -> tuple[np.ndarray, ...]:
        # _tau_tables[i] sends level-1 symbols to level-(i+1); index 0 is identity.
        tabs = [np.arange(self.alphabet_sizes[0])]
        for fm in self.factor_maps:
            tabs.append(np.asarray(fm, dtype=np.int64)[tabs[-1]])
        return tuple(tabs)

    @cached_property
    def _fibers(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        # _fibers[i][c] lists level-(i+1) symbols mapping to level-(i+2) symbol c.
        out = []
        for i, fm in enumerate(self.factor_maps):
            dst = self.alphabet_sizes[i + 1]
            fib = [[] for _ in range(dst)]
            for s, t in enumerate(fm):
                fib[t].append(s)
            out.append(tuple(tuple(f) for f in fib))
        return tuple(out)

    def tau_table(self, steps: int) -> np.ndarray:
        """Composite map from level 1 down to level steps+1, as a lookup array."""
        return self._tau_tables[steps]

    def map_between(self, level_from: int, level_to: int) -> np.ndarray:
        """Lookup array for the composite map level_from -> level_to."""
        if not 1 <= level_from <= level_to <= self.k:
            raise ModelError("bad level pair")
        tab = np.arange(self.alphabet_sizes[level_from - 1])
        for i in range(level_from - 1, level_to - 1):
            tab = np.asarray(self.factor_maps[i], dtype=np.int64)[tab]
        return tab

    def fibers(self, level: int) -> tuple[tuple[int, ...], ...]:
        """Preimages under the map from `level` to `level+1`, per target symbol."""
        return self._fibers[level - 1]

    def check_word(self, w: Word):
        if not 1 <= w.level <= self.k:
            raise ModelError(f"word level {w.level} outside chain")
        n = self.alphabet_sizes[w.level - 1]
        if any(not (0 <= s < n) for s in w.symbols):
            raise ModelError("word has out-of-range symbols")


@dataclass(frozen=True)
class WeightVector:
    """Level weights a_1..a_k with a_1 > 0 and a_i >= 0 for i >= 2."""

    a: tuple[float, ...]

    def __post_init__(self):
        if len(self.a) < 1:
            raise ModelError("weight vector is empty")
        if not self.a[0] > 0:
            raise ModelError("first weight must be strictly positive")
        if any(x < 0 for x in self.a[1:]):
            raise ModelError("weights must be nonnegative")

    @cached_property
    def partial(self) -> tuple[float, ...]:
        """Running sums A_i = a_1 + ... + a_i; positive and nondecreasing."""
        return tuple(float(x) for x in np.cumsum(self.a))

    def __len__(self) -> int:
        return len(self.a)


def constraint_length(n: int, i: int, weights: WeightVector) -> int:
    """Smallest integer p with p >= A_i * n / a_1; zero for i = 0.

    This is the length of the level-i prefix constraint carried by a ball of
    radius e^(-n/a_1).  Thresholds within a hair of an integer are snapped to
    it so that exactly representable ratios (a_1 = a_2, say) behave exactly.
    """
    if i == 0:
        return 0
    if not 1 <= i <= len(weights):
        raise ModelError("level index outside weight vector")
    if n < 0:
        raise ModelError("radius index must be nonnegative")
    x = weights.partial[i - 1] * n / weights.a[0]
    r = round(x)
    if abs(x - r) <= _INT_SNAP * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


def project_word(chain: FactorChain, steps: int, w: Word) -> Word:
    """Apply the composite factor map `steps` times; steps = 0 is the identity."""
    if w.level != 1:
        raise ModelError("projection starts from level-1 words")
    if not 0 <= steps <= chain.k - 1:
        raise ModelError("projection depth outside chain")
    tab = chain.tau_table(steps)
    return Word(steps + 1, tuple(int(tab[s]) for s in w.symbols))


def _agreement(x: np.ndarray, y: np.ndarray) -> int:
    """Length of the common prefix of two equal-length symbol arrays."""
    neq = np.nonzero(x != y)[0]
    return int(neq[0]) if neq.size else len(x)


def self_affine_metric(chain: FactorChain, weights: WeightVector, x: Word, y: Word) -> float:
    """Distance max_i exp(-m_i / A_i), m_i = agreement length at level i.

    x and y are level-1 words of equal length; disagreement at position 0
    at any level gives distance 1.
    """
    chain.check_word(x)
    chain.check_word(y)
    if len(x) != len(y):
        raise ModelError("metric needs equal-length words")
    xs = np.asarray(x.symbols, dtype=np.int64)
    ys = np.asarray(y.symbols, dtype=np.int64)
    d = 0.0
    for i in range(chain.k):
        tab = chain.tau_table(i)
        m = _agreement(tab[xs], tab[ys])
        d = max(d, math.exp(-m / weights.partial[i]))
    return d


@dataclass(frozen=True)
class BallShape:
    """Prefix constraints cutting out a ball of radius e^(-n/a_1).

    constraints[i-1] is the level-i word that tau_{i-1}(y) must start with;
    its length is constraint_length(n, i, weights).
    """

    n: int
    constraints: tuple[Word, ...]

    def lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.constraints)

    def contains(self, chain: FactorChain, y: Word) -> bool:
        """Membership of the cylinder of a level-1 word long enough to decide."""
        chain.check_word(y)
        if len(y) < len(self.constraints[-1]) or y.level != 1:
            raise ModelError("word too short to decide ball membership")
        ys = np.asarray(y.symbols, dtype=np.int64)
        for i, c in enumerate(self.constraints):
            proj = chain.tau_table(i)[ys[: len(c)]]
            if tuple(int(s) for s in proj) != c.symbols:
                return False
        return True

    def position_fibers(self, chain: FactorChain) -> list[tuple[int, ...]]:
        """Allowed level-1 symbols at each position up to the longest constraint.

        At position j only the finest still-active level binds; coarser
        constraints are consistent by construction.
        """
        lens = self.lengths()
        total = lens[-1]
        out = []
        for j in range(total):
            allowed = []
            binding = [i for i in range(len(lens)) if lens[i] > j]
            for s in range(chain.alphabet_sizes[0]):
                ok = all(
                    int(chain.tau_table(i)[s]) == self.constraints[i][j] for i in binding
                )
                if ok:
                    allowed.append(s)
            out.append(tuple(allowed))
        return out

    def enumerate_words(self, chain: FactorChain):
        """All level-1 words of the deciding length whose cylinders meet the ball."""
        for combo in itertools.product(*self.position_fibers(chain)):
            yield Word(1, combo)


def ball_shape(chain: FactorChain, weights: WeightVector, x_prefix: Word, n: int) -> BallShape:
    """Constraint system of B(x, e^(-n/a_1)) around any x starting with x_prefix."""
    chain.check_word(x_prefix)
    if x_prefix.level != 1:
        raise ModelError("ball centers are level-1 words")
    if len(weights) != chain.k:
        raise ModelError("weight vector length must match the chain")
    lens = [constraint_length(n, i, weights) for i in range(1, chain.k + 1)]
    if len(x_prefix) < lens[-1]:
        raise ModelError(f"center prefix needs at least {lens[-1]} symbols")
    cons = []
    for i in range(1, chain.k + 1):
        head = Word(1, x_prefix.symbols[: lens[i - 1]])
        cons.append(project_word(chain, i - 1, head))
    return BallShape(n, tuple(cons))
