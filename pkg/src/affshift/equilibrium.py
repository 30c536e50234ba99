"""Weighted Gibbs measures, invariant measure specs, entropies.

For a depth-1 potential the weighted equilibrium state is an exact product
measure: exp(-P/A_k + log phi_a(s)) sums to one over the level-1 alphabet,
and cylinder, marginal and ball masses are all finite products or ratios of
the cascade tables.  Deeper potentials get the same formulas evaluated at
the pressure estimate; masses are then defined up to the propagated ratio
bound rather than exactly additive.

Ball masses telescope the per-level marginal prefix masses:

    log mu(B(x, e^(-n/a_1))) = -(P/A_k) l_k
        + (1/A_1) L_0(l_1)
        + sum_{j=1}^{k-1} [ (1/A_{j+1}) L_j(l_{j+1}) - (1/A_j) L_j(l_j) ],

with l_i the ball's constraint lengths and L_j(p) the log weight of the
pushed potential on the level-(j+1) projection of the length-p prefix.  In
exact mode this equals the sum of the cylinder masses meeting the ball.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .logsum import lse_tree
from .potential import (
    CylinderPotential,
    FiniteDepthPotential,
    push_chain,
    weighted_potential,
)
from .pressure import (
    DEFAULT_BUDGET,
    PressureEnclosure,
    depth1_gibbs_log_table,
    pressure,
)
from .shift_space import FactorChain, WeightVector, Word, constraint_length

_SIMPLEX_TOL = 1e-10
_STATIONARY_TOL = 1e-9


@dataclass(frozen=True)
class BracketedValue:
    """A point value plus a certified interval around it."""

    value: float
    lo: float
    hi: float

    def width(self) -> float:
        return self.hi - self.lo


def _plogp(p: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return float(-terms.sum())


@dataclass(frozen=True)
class InvariantMeasureSpec:
    """A shift-invariant reference measure: Bernoulli or stationary Markov."""

    kind: str
    p: tuple[float, ...] | None = None
    initial: tuple[float, ...] | None = None
    transition: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.kind == "bernoulli":
            v = np.asarray(self.p, dtype=float)
            if v.ndim != 1 or v.size < 1 or np.any(v < 0):
                raise ModelError("bernoulli weights must be a nonnegative vector")
            if abs(v.sum() - 1.0) > _SIMPLEX_TOL:
                raise ModelError("bernoulli weights must sum to one")
        elif self.kind == "markov":
            pi = np.asarray(self.initial, dtype=float)
            tr = np.asarray(self.transition, dtype=float)
            if tr.ndim != 2 or tr.shape[0] != tr.shape[1] or pi.shape != (tr.shape[0],):
                raise ModelError("markov spec needs a square matrix and matching vector")
            if np.any(pi < 0) or np.any(tr < 0):
                raise ModelError("markov probabilities must be nonnegative")
            if abs(pi.sum() - 1.0) > _SIMPLEX_TOL:
                raise ModelError("initial distribution must sum to one")
            if np.max(np.abs(tr.sum(axis=1) - 1.0)) > _SIMPLEX_TOL:
                raise ModelError("transition rows must sum to one")
            if np.max(np.abs(pi @ tr - pi)) > _STATIONARY_TOL:
                raise ModelError("initial distribution is not stationary")
        else:
            raise ModelError(f"unknown measure kind {self.kind!r}")

    @staticmethod
    def bernoulli(p) -> "InvariantMeasureSpec":
        return InvariantMeasureSpec("bernoulli", p=tuple(float(x) for x in p))

    @staticmethod
    def markov(initial, transition) -> "InvariantMeasureSpec":
        return InvariantMeasureSpec(
            "markov",
            initial=tuple(float(x) for x in initial),
            transition=tuple(tuple(float(x) for x in row) for row in transition),
        )

    @property
    def alphabet_size(self) -> int:
        return len(self.p) if self.kind == "bernoulli" else len(self.initial)

    def log_mass(self, word: Word) -> float:
        if word.level != 1:
            raise ModelError("reference measures live on level 1")
        syms = np.asarray(word.symbols, dtype=np.int64)
        if syms.size == 0:
            return 0.0
        with np.errstate(divide="ignore"):
            if self.kind == "bernoulli":
                return float(np.log(np.asarray(self.p))[syms].sum())
            logpi = np.log(np.asarray(self.initial))
            logtr = np.log(np.asarray(self.transition))
            return float(logpi[syms[0]] + logtr[syms[:-1], syms[1:]].sum())

    def block_distribution(self, m: int) -> np.ndarray:
        """Probabilities of all m-blocks, flat in big-endian symbol order."""
        n = self.alphabet_size
        if self.kind == "bernoulli":
            out = np.asarray(self.p, dtype=float)
            for _ in range(m - 1):
                out = np.multiply.outer(out, np.asarray(self.p)).reshape(-1)
            return out
        tr = np.asarray(self.transition, dtype=float)
        out = np.asarray(self.initial, dtype=float).copy()
        for _ in range(m - 1):
            out = (out[:, None] * tr[_last_symbols(out.size, n)]).reshape(-1)
        return out

    def expectation(self, p: FiniteDepthPotential) -> float:
        """Mean of the generating block table: the additive average per step."""
        dist = self.block_distribution(p.depth)
        return float(dist @ p.table.reshape(-1))

    def entropy(self) -> float:
        if self.kind == "bernoulli":
            return _plogp(np.asarray(self.p))
        pi = np.asarray(self.initial)
        tr = np.asarray(self.transition)
        rows = np.array([_plogp(row) for row in tr])
        return float(pi @ rows)


def _last_symbols(size: int, n: int) -> np.ndarray:
    """Last symbol of each big-endian code 0..size-1 over an n-letter alphabet."""
    return np.arange(size, dtype=np.int64) % n


def _hidden_markov_bracket(
    initial: np.ndarray, transition: np.ndarray, obs: np.ndarray, block_len: int
) -> BracketedValue:
    """Entropy rate bracket for a one-block image of a stationary Markov chain.

    Standard conditional-entropy squeeze: H(Y_n | Y_1^{n-1}) decreases to the
    rate from above, H(Y_n | Y_1^{n-1}, X_1) increases to it from below; both
    come out of one forward pass over the joint of (X_1, Y_1..Y_n, X_n).
    """
    n_src = len(initial)
    n_obs = int(obs.max()) + 1
    # shrink the horizon if the dense joint would blow up
    while n_obs**block_len * n_src * n_src > 4e7 and block_len > 2:
        block_len -= 1
    joint = np.zeros((n_src, n_obs, n_src))
    for x in range(n_src):
        joint[x, obs[x], x] = initial[x]
    h_y_prev = h_xy_prev = None
    upper = lower = None
    for n in range(1, block_len + 1):
        if n > 1:
            stepped = np.einsum("ayx,xz->ayz", joint, transition)
            y_count = joint.shape[1]
            grown = np.zeros((n_src, y_count * n_obs, n_src))
            base = np.arange(y_count) * n_obs
            for z in range(n_src):
                grown[:, base + obs[z], z] = stepped[:, :, z]
            joint = grown
        p_y = joint.sum(axis=(0, 2)).reshape(-1)
        p_xy = joint.sum(axis=2).reshape(-1)
        h_y = _plogp(p_y)
        h_xy = _plogp(p_xy)
        if h_y_prev is not None:
            upper = h_y - h_y_prev
            lower = h_xy - h_xy_prev
        h_y_prev, h_xy_prev = h_y, h_xy
    if upper is None:
        raise ModelError("entropy bracket needs a horizon of at least two")
    lower = max(0.0, float(lower))
    upper = float(upper)
    return BracketedValue(0.5 * (lower + upper), lower, upper)


def pushed_entropy(
    eta: InvariantMeasureSpec, chain: FactorChain, level: int, block_len: int = 8
) -> BracketedValue:
    """Entropy of the level-i image of a level-1 measure under the chain maps."""
    if not 1 <= level <= chain.k:
        raise ModelError("level outside chain")
    obs = chain.tau_table(level - 1)
    if eta.kind == "bernoulli":
        q = np.zeros(chain.alphabet_sizes[level - 1])
        np.add.at(q, obs, np.asarray(eta.p))
        h = _plogp(q)
        return BracketedValue(h, h, h)
    tr = np.asarray(eta.transition)
    pi = np.asarray(eta.initial)
    if level == 1 or (
        chain.alphabet_sizes[level - 1] == chain.alphabet_sizes[0]
        and len(set(obs.tolist())) == len(obs)
    ):
        # identity or relabeling: still Markov, entropy is exact
        h = eta.entropy()
        return BracketedValue(h, h, h)
    return _hidden_markov_bracket(pi, tr, obs, block_len)


def weighted_entropy(
    eta: InvariantMeasureSpec,
    chain: FactorChain,
    weights: WeightVector,
    block_len: int = 8,
) -> BracketedValue:
    """Weighted entropy sum_i a_i h(level-i image), bracketed where inexact."""
    if eta.alphabet_size != chain.alphabet_sizes[0]:
        raise ModelError("measure alphabet does not match the chain")
    val = lo = hi = 0.0
    for i in range(1, chain.k + 1):
        h = pushed_entropy(eta, chain, i, block_len)
        a_i = weights.a[i - 1]
        val += a_i * h.value
        lo += a_i * h.lo
        hi += a_i * h.hi
    return BracketedValue(val, lo, hi)


class WeightedGibbsMeasure:
    """Equilibrium-state masses for a level-1 potential under level weights.

    mode 'exact_depth1': true product measure, every mass exact.
    mode 'gibbs_ratio': masses are the defining formulas evaluated at the
    pressure estimate, exact up to `log_ratio_bound`.
    """

    def __init__(
        self,
        potential: CylinderPotential,
        chain: FactorChain,
        weights: WeightVector,
        n_max: int | None = None,
        budget: float = DEFAULT_BUDGET,
        threads: int = 1,
    ):
        if potential.level != 1:
            raise ModelError("gibbs measures are built from level-1 potentials")
        if len(weights) != chain.k:
            raise ModelError("weight vector length must match the chain")
        self.potential = potential
        self.chain = chain
        self.weights = weights
        self.pushed = push_chain(potential, chain, weights)
        self.phi_a = weighted_potential(self.pushed, chain, weights)
        if isinstance(potential, FiniteDepthPotential) and potential.depth == 1:
            self.mode = "exact_depth1"
            log_p, val, tables = depth1_gibbs_log_table(potential, chain, weights)
            self.log_symbol_mass = log_p
            self.level_tables = tables
            self.pressure = PressureEnclosure(val, val, val, 1, "closed_form")
            total = math.exp(lse_tree(log_p))
            if abs(total - 1.0) > 1e-12:
                raise ModelError("symbol masses failed to normalize")
            margs = [log_p]
            for i in range(1, chain.k):
                fibers = chain.fibers(i)
                margs.append(
                    np.array([lse_tree(margs[-1][list(f)]) for f in fibers])
                )
            self.log_level_marginals = margs
        else:
            self.mode = "gibbs_ratio"
            self.pressure = pressure(
                potential, chain, weights, n_max=n_max, budget=budget, threads=threads
            )

    # -- masses ---------------------------------------------------------

    def log_cylinder_mass(self, word: Word) -> float:
        """log mass of a level-1 cylinder."""
        self.chain.check_word(word)
        if word.level != 1:
            raise ModelError("cylinder masses are level-1 objects")
        if self.mode == "exact_depth1":
            syms = np.asarray(word.symbols, dtype=np.int64)
            return float(self.log_symbol_mass[syms].sum()) if len(word) else 0.0
        a_top = self.weights.partial[-1]
        return -len(word) * self.pressure.estimate / a_top + self.phi_a.log_phi(word)

    def log_marginal_mass(self, level: int, word: Word) -> float:
        """log mass of a level-i cylinder under the pushed measure, 2 <= i <= k."""
        if not 2 <= level <= self.chain.k:
            raise ModelError("marginal levels run from 2 to k")
        if word.level != level:
            raise ModelError("word level does not match the requested marginal")
        self.chain.check_word(word)
        if self.mode == "exact_depth1":
            syms = np.asarray(word.symbols, dtype=np.int64)
            tab = self.log_level_marginals[level - 1]
            return float(tab[syms].sum()) if len(word) else 0.0
        part = self.weights.partial
        n = len(word)
        a_top = part[-1]
        total = -n * self.pressure.estimate / a_top
        syms = np.asarray(word.symbols, dtype=np.int64)
        total += self.pushed[level - 1]._log_phi_arr(syms) / part[level - 1]
        for j in range(level, self.chain.k):
            coeff = 1.0 / part[j] - 1.0 / part[j - 1]
            proj = self.chain.map_between(level, j + 1)[syms]
            total += coeff * self.pushed[j]._log_phi_arr(proj)
        return total

    def log_ball_mass(self, x_prefix: Word, n: int) -> float:
        """log mass of the metric ball B(x, e^(-n/a_1)), x starting with x_prefix.

        Uses the telescoped marginal formula with the exact constraint
        lengths, so in exact mode it reproduces the fiber sum to rounding.
        """
        part = self.weights.partial
        k = self.chain.k
        lens = [constraint_length(n, i, self.weights) for i in range(0, k + 1)]
        if len(x_prefix) < lens[-1] or x_prefix.level != 1:
            raise ModelError(f"center prefix needs at least {lens[-1]} level-1 symbols")
        syms = np.asarray(x_prefix.symbols, dtype=np.int64)
        total = -lens[-1] * self.pressure.estimate / part[-1]
        total += self.pushed[0]._log_phi_arr(syms[: lens[1]]) / part[0]
        for j in range(1, k):
            proj = self.chain.tau_table(j)[syms]
            total += self.pushed[j]._log_phi_arr(proj[: lens[j + 1]]) / part[j]
            total -= self.pushed[j]._log_phi_arr(proj[: lens[j]]) / part[j - 1]
        return total

    def log_ratio_bound(self, n: int) -> float:
        """Conservative bound B with true log-mass in [formula - B, formula + B]."""
        if self.mode == "exact_depth1":
            return 0.0
        k = self.chain.k
        return (2 * k - 1) * self.potential.qm_log_constant + n * self.pressure.width()

    # -- derived quantities ----------------------------------------------

    def to_measure_spec(self) -> InvariantMeasureSpec:
        if self.mode != "exact_depth1":
            raise ModelError("only exact product measures convert to a spec")
        return InvariantMeasureSpec.bernoulli(np.exp(self.log_symbol_mass))

    def weighted_entropy(self) -> BracketedValue:
        if self.mode != "exact_depth1":
            raise ModelError("exact weighted entropy needs a depth-1 potential")
        val = 0.0
        for i in range(self.chain.k):
            val += self.weights.a[i] * _plogp(np.exp(self.log_level_marginals[i]))
        return BracketedValue(val, val, val)

    def cylinder_masses_csv(self, n: int) -> str:
        """CSV 'word,log_mass' over all level-1 words of length n, lexicographic."""
        rows = ["word,log_mass"]
        for combo in itertools.product(range(self.chain.alphabet_sizes[0]), repeat=n):
            w = Word(1, combo)
            rows.append("%s,%r" % ("".join(map(str, combo)), self.log_cylinder_mass(w)))
        return "\n".join(rows) + "\n"


def _mass_fn(measure):
    if isinstance(measure, WeightedGibbsMeasure):
        return measure.log_cylinder_mass
    if isinstance(measure, InvariantMeasureSpec):
        return measure.log_mass
    raise ModelError("unsupported measure object")


def quasi_bernoulli_diagnostic(measure, chain: FactorChain, n_max: int = 3) -> float:
    """Largest additivity defect |log m(IJ) - log m(I) - log m(J)| over short words.

    Returns inf when a concatenation has zero mass but its pieces do not.
    """
    lm = _mass_fn(measure)
    n_sym = chain.alphabet_sizes[0]
    words = []
    for ln in range(1, n_max + 1):
        words.extend(itertools.product(range(n_sym), repeat=ln))
    worst = 0.0
    for left in words:
        for right in words:
            a = lm(Word(1, left))
            b = lm(Word(1, right))
            ab = lm(Word(1, left + right))
            if math.isinf(ab) and not (math.isinf(a) or math.isinf(b)):
                return math.inf
            if math.isinf(a) or math.isinf(b):
                continue
            worst = max(worst, abs(ab - a - b))
    return worst


def product_relation_check(mu: WeightedGibbsMeasure, n_max: int = 6) -> float:
    """Two-level identity: max |a log mu(I) + b log nu(pi I) - log phi(I) + n P|."""
    if mu.chain.k != 2:
        raise ModelError("product relation is a two-level identity")
    a, b = mu.weights.a
    p_est = mu.pressure.estimate
    worst = 0.0
    for ln in range(1, n_max + 1):
        for combo in itertools.product(range(mu.chain.alphabet_sizes[0]), repeat=ln):
            w = Word(1, combo)
            proj = Word(2, tuple(int(s) for s in mu.chain.tau_table(1)[list(combo)]))
            dev = (
                a * mu.log_cylinder_mass(w)
                + b * mu.log_marginal_mass(2, proj)
                - mu.potential.log_phi(w)
                + ln * p_est
            )
            worst = max(worst, abs(dev))
    return worst
