"""Cylinder potentials and the fiber-sum push between levels.

A potential assigns to every finite word I a log-weight log phi(I), the log
of the supremum of the underlying n-step weight over the cylinder [I].
Finite-depth potentials are Birkhoff sums of a block function g over sliding
windows of a fixed depth m; windows sticking out past the end of the word
contribute their maximum over all completions.

The push to the next level replaces phi by

    psi(J) = ( sum_{I in fiber(J)} phi(I)^(1/A) )^A,

the fiber running over preimage words of J under the one-block map and A
being the running weight sum at the source level.  Three evaluation routes:
depth-1 tables stay depth-1 in closed form, deeper finite tables become
positive matrix path sums, everything else enumerates the fiber.  On a full
shift the sup over [I] needs no fiber restriction; a proper subshift would
need one, which is out of scope here.

Almost-additivity is tracked through `qm_log_constant`: a bound C with
|log phi(I J) - log phi(I) - log phi(J)| <= C for all words.  Pushes leave
it unchanged, linear combinations add it with absolute coefficients.
"""
from __future__ import annotations

import itertools
import math
from functools import cached_property

import numpy as np

from .errors import ModelError
from .logsum import lse_axis, lse_tree
from .shift_space import FactorChain, WeightVector, Word


class CylinderPotential:
    """Base interface: a level, an additivity defect bound, and log phi."""

    level: int
    qm_log_constant: float

    def log_phi(self, word: Word) -> float:
        if word.level != self.level:
            raise ModelError(f"potential lives at level {self.level}, word at {word.level}")
        return self._log_phi_arr(np.asarray(word.symbols, dtype=np.int64))

    def _log_phi_arr(self, symbols: np.ndarray) -> float:
        raise NotImplementedError

    def log_phi_words(self, words: np.ndarray) -> np.ndarray:
        """Batch evaluation over the rows of an integer matrix of words."""
        return np.array([self._log_phi_arr(row) for row in words], dtype=float)

    def enum_cost(self, n: int) -> float:
        """Rough per-word work multiplier for budget accounting."""
        return 1.0


def cylinder_log_weight(p: CylinderPotential, word: Word) -> float:
    """log sup of the n-step weight over the cylinder of `word`."""
    return p.log_phi(word)


class FiniteDepthPotential(CylinderPotential):
    """Additive potential generated by a depth-m block table.

    log_table maps m-blocks to reals; phi_n sums the table over all n window
    positions, the last m-1 of them maximized over unseen symbols.  The
    defect bound defaults to (m-1) * (table spread).
    """

    def __init__(self, level: int, depth: int, log_table, qm_log_constant: float | None = None):
        table = np.asarray(log_table, dtype=float)
        if depth < 1:
            raise ModelError("depth must be at least 1")
        if table.ndim == 1:
            size = round(table.size ** (1.0 / depth))
            if size**depth != table.size:
                raise ModelError("flat table length is not a power of the alphabet size")
            table = table.reshape((size,) * depth)
        if table.ndim != depth or len(set(table.shape)) != 1:
            raise ModelError("table must be an m-cube over one alphabet")
        if not np.all(np.isfinite(table)):
            raise ModelError("table entries must be finite")
        self.level = int(level)
        self.depth = int(depth)
        self.alphabet_size = int(table.shape[0])
        self.table = table
        spread = float(table.max() - table.min()) if table.size else 0.0
        self.qm_log_constant = (
            float(qm_log_constant) if qm_log_constant is not None else (depth - 1) * spread
        )

    @cached_property
    def _flat_tails(self) -> dict[int, np.ndarray]:
        """tails[v]: max over the last m-v coordinates, flattened big-endian."""
        n, m = self.alphabet_size, self.depth
        tails = {m: self.table.reshape(-1)}
        for v in range(m - 1, 0, -1):
            tails[v] = self.table.reshape(n**v, n ** (m - v)).max(axis=1)
        return tails

    def _window_codes(self, words: np.ndarray, j: int, v: int) -> np.ndarray:
        n = self.alphabet_size
        pow_ = n ** np.arange(v - 1, -1, -1, dtype=np.int64)
        return words[:, j : j + v] @ pow_

    def log_phi_words(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        if words.ndim != 2:
            raise ModelError("expected a matrix of words")
        b, length = words.shape
        vals = np.zeros(b)
        tails = self._flat_tails
        for j in range(length):
            v = min(self.depth, length - j)
            vals += tails[v][self._window_codes(words, j, v)]
        return vals

    def _log_phi_arr(self, symbols: np.ndarray) -> float:
        if symbols.size == 0:
            return 0.0
        return float(self.log_phi_words(symbols[None, :])[0])


def zero_potential(level: int, alphabet_size: int) -> FiniteDepthPotential:
    return FiniteDepthPotential(level, 1, np.zeros(alphabet_size))


def lift_depth(p: FiniteDepthPotential, depth: int) -> FiniteDepthPotential:
    """Re-express a finite-depth potential with a deeper table, same values."""
    if depth < p.depth:
        raise ModelError("cannot lower depth")
    if depth == p.depth:
        return p
    reps = p.alphabet_size ** (depth - p.depth)
    table = np.repeat(p.table.reshape(-1), reps)
    return FiniteDepthPotential(p.level, depth, table, qm_log_constant=p.qm_log_constant)


def linear_combination(
    ps: list[FiniteDepthPotential], coeffs
) -> FiniteDepthPotential:
    """Combination sum_i c_i g_i of the generating block functions.

    Exact on the underlying tables after lifting to a common depth, hence on
    every fully visible window; cylinder values can differ from the same
    combination of the inputs' cylinder values on the trailing m-1 positions,
    where a max of a sum is not a sum of maxes.  The propagated defect
    constant sum_i |c_i| qm_i covers that slack.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if len(ps) != coeffs.size or not ps:
        raise ModelError("need one coefficient per potential")
    if len({p.level for p in ps}) != 1 or len({p.alphabet_size for p in ps}) != 1:
        raise ModelError("potentials must share level and alphabet")
    depth = max(p.depth for p in ps)
    table = np.zeros(ps[0].alphabet_size ** depth)
    qm = 0.0
    for c, p in zip(coeffs, ps):
        table += c * lift_depth(p, depth).table.reshape(-1)
        qm += abs(float(c)) * p.qm_log_constant
    return FiniteDepthPotential(ps[0].level, depth, table, qm_log_constant=qm)


class MatrixCocyclePotential(CylinderPotential):
    """Push of a depth-m (m >= 2) finite potential: a positive matrix path sum.

    States are (m-1)-blocks of source symbols; a step appends one symbol and
    pays exp(g(window)/A).  Words constrain each appended symbol to the fiber
    of the corresponding target symbol.  log phi(J) = A * log(path sum),
    with boundary vectors absorbing the maximized trailing windows.
    """

    def __init__(self, level: int, base: FiniteDepthPotential, proj, exponent: float):
        if base.depth < 2:
            raise ModelError("matrix form needs depth at least 2")
        self.level = int(level)  # target level, source is level-1 of the chain step
        self.base = base
        self.proj = np.asarray(proj, dtype=np.int64)  # source symbol -> target symbol
        self.exponent = float(exponent)
        self.qm_log_constant = base.qm_log_constant

    @cached_property
    def _structure(self):
        n = self.base.alphabet_size
        m = self.base.depth
        s_count = n ** (m - 1)
        states = np.arange(s_count)
        # dense step matrix: state s -> state (s mod n^(m-2)) * n + d
        w = np.full((s_count, s_count), -np.inf)
        g = self.base.table.reshape(-1)
        drop = n ** (m - 2)
        for s in range(s_count):
            tail = (s % drop) * n
            for d in range(n):
                w[s, tail + d] = g[s * n + d] / self.exponent
        # target-alphabet code of each state's projected (m-1)-block
        d_size = int(self.proj.max()) + 1
        digits = np.stack(
            [(states // n ** (m - 2 - t)) % n for t in range(m - 1)], axis=1
        )
        proj_digits = self.proj[digits]
        pows = d_size ** np.arange(m - 2, -1, -1, dtype=np.int64)
        state_proj = proj_digits @ pows
        last_proj = self.proj[states % n]
        # boundary: maximized windows hanging past the end of the word
        tails = self.base._flat_tails
        boundary = np.zeros(s_count)
        for v in range(1, m):
            boundary += tails[v][states % n**v] / self.exponent
        return w, state_proj, last_proj, boundary, d_size

    def _fiber_words(self, symbols: np.ndarray):
        fibs = [np.nonzero(self.proj == c)[0] for c in symbols]
        return itertools.product(*fibs)

    def log_phi_words(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        b, length = words.shape
        m = self.base.depth
        if length == 0:
            return np.zeros(b)
        if length < m - 1:
            return super().log_phi_words(words)
        w, state_proj, last_proj, boundary, d_size = self._structure
        pows = d_size ** np.arange(m - 2, -1, -1, dtype=np.int64)
        head = words[:, : m - 1] @ pows if m >= 2 else np.zeros(b, dtype=np.int64)
        u = np.where(state_proj[None, :] == head[:, None], 0.0, -np.inf)
        for t in range(m - 1, length):
            u = lse_axis(u[:, :, None] + w[None, :, :], axis=1)
            u = np.where(last_proj[None, :] == words[:, t, None], u, -np.inf)
        return self.exponent * lse_axis(u + boundary[None, :], axis=1)

    def _log_phi_arr(self, symbols: np.ndarray) -> float:
        if symbols.size == 0:
            return 0.0
        if symbols.size < self.base.depth - 1:
            vals = [
                self.base._log_phi_arr(np.asarray(fib, dtype=np.int64)) / self.exponent
                for fib in self._fiber_words(symbols)
            ]
            return self.exponent * lse_tree(vals)
        return float(self.log_phi_words(symbols[None, :])[0])

    def enum_cost(self, n: int) -> float:
        return float(self.base.alphabet_size ** (self.base.depth - 1))


class PushedPotential(CylinderPotential):
    """Generic push: enumerate the fiber of each word.  Exponential but exact."""

    def __init__(self, level: int, base: CylinderPotential, fibers, exponent: float):
        self.level = int(level)
        self.base = base
        self.fibers = tuple(tuple(f) for f in fibers)
        self.exponent = float(exponent)
        self.qm_log_constant = base.qm_log_constant
        self._memo: dict[tuple[int, ...], float] = {}

    def _log_phi_arr(self, symbols: np.ndarray) -> float:
        key = tuple(int(s) for s in symbols)
        if key in self._memo:
            return self._memo[key]
        if not key:
            return 0.0
        vals = [
            self.base._log_phi_arr(np.asarray(combo, dtype=np.int64)) / self.exponent
            for combo in itertools.product(*(self.fibers[c] for c in key))
        ]
        out = self.exponent * lse_tree(vals)
        self._memo[key] = out
        return out

    def enum_cost(self, n: int) -> float:
        biggest = max(len(f) for f in self.fibers)
        return float(biggest**n) * self.base.enum_cost(n)


def push_potential(p: CylinderPotential, chain: FactorChain, weights: WeightVector) -> CylinderPotential:
    """One level up: psi(J) = (sum over the fiber of phi^(1/A_i))^(A_i)."""
    i = p.level
    if not 1 <= i <= chain.k - 1:
        raise ModelError("cannot push past the top level")
    exp_a = weights.partial[i - 1]
    fibers = chain.fibers(i)
    if isinstance(p, FiniteDepthPotential) and p.depth == 1:
        g = p.table
        w = np.array([exp_a * lse_tree(g[list(f)] / exp_a) for f in fibers])
        return FiniteDepthPotential(i + 1, 1, w, qm_log_constant=p.qm_log_constant)
    if isinstance(p, FiniteDepthPotential):
        return MatrixCocyclePotential(i + 1, p, chain.factor_maps[i - 1], exp_a)
    return PushedPotential(i + 1, p, fibers, exp_a)


def push_chain(p: CylinderPotential, chain: FactorChain, weights: WeightVector) -> list[CylinderPotential]:
    """[phi, push(phi), push(push(phi)), ...] up to the top level."""
    if p.level != 1:
        raise ModelError("chains of pushes start at level 1")
    if len(weights) != chain.k:
        raise ModelError("weight vector length must match the chain")
    out = [p]
    for _ in range(chain.k - 1):
        out.append(push_potential(out[-1], chain, weights))
    return out


class CombinedWeightedPotential(CylinderPotential):
    """Level-1 potential log phi_a built from a full chain of pushes.

    log phi_a(I) = (1/A_1) log phi(I)
                 + sum_{i=1}^{k-1} (1/A_{i+1} - 1/A_i) log psi_i(tau_i I),

    the exponents being nonincreasing in i, so later levels enter with
    nonpositive powers.
    """

    def __init__(self, pushed: list[CylinderPotential], chain: FactorChain, weights: WeightVector):
        self.level = 1
        self.pushed = pushed
        self.chain = chain
        self.weights = weights
        part = weights.partial
        qm = pushed[0].qm_log_constant / part[0]
        for i in range(1, chain.k):
            qm += abs(1.0 / part[i] - 1.0 / part[i - 1]) * pushed[i].qm_log_constant
        self.qm_log_constant = qm

    def _log_phi_arr(self, symbols: np.ndarray) -> float:
        part = self.weights.partial
        total = self.pushed[0]._log_phi_arr(symbols) / part[0]
        for i in range(1, self.chain.k):
            proj = self.chain.tau_table(i)[symbols]
            total += (1.0 / part[i] - 1.0 / part[i - 1]) * self.pushed[i]._log_phi_arr(proj)
        return total


def weighted_potential(
    pushed: list[CylinderPotential], chain: FactorChain, weights: WeightVector
) -> CylinderPotential:
    """Collapse a chain of pushes into the level-1 weighted potential.

    For a depth-1 chain the result is again a depth-1 table, and the log
    Gibbs weights it induces are exact; otherwise evaluation walks the chain.
    """
    if len(pushed) != chain.k:
        raise ModelError("need one pushed potential per level")
    part = weights.partial
    if all(isinstance(p, FiniteDepthPotential) and p.depth == 1 for p in pushed):
        table = pushed[0].table / part[0]
        for i in range(1, chain.k):
            coeff = 1.0 / part[i] - 1.0 / part[i - 1]
            table = table + coeff * pushed[i].table[chain.tau_table(i)]
        return FiniteDepthPotential(1, 1, table, qm_log_constant=0.0)
    return CombinedWeightedPotential(pushed, chain, weights)
