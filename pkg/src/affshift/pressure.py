"""Weighted topological pressure: closed forms, enumeration, enclosures.

The scalar sequence s_n = log of the fully pushed cylinder sum satisfies
|s_{n+m} - s_n - s_m| <= C with C the potential's additivity defect, so both
(s_n + C)/n and -((-s_n + C)/n) squeeze the limit:

    lo = max_n (s_n - C)/n   <=   P   <=   min_n (s_n + C)/n = hi.

These rails are a construction of this implementation, conservative but
certified modulo floating-point rounding (a small pad absorbs that).  The
point estimate accelerates s_n/n with Aitken's delta-squared rule, guarded
against tiny denominators, and is clamped into [lo, hi].
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, EnclosureWidthError, ModelError
from .logsum import lse_tree
from .potential import (
    CylinderPotential,
    FiniteDepthPotential,
    linear_combination,
    push_chain,
)
from .shift_space import FactorChain, WeightVector

DEFAULT_BUDGET = 10**7
_CHUNK = 1 << 13
_AITKEN_GUARD = 1e-12
_FLOAT_PAD = 1e-11


@dataclass(frozen=True)
class PressureEnclosure:
    estimate: float
    lo: float
    hi: float
    n_used: int
    method: str  # closed_form | enclosure

    def width(self) -> float:
        return self.hi - self.lo

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "lo": self.lo,
            "hi": self.hi,
            "n_used": self.n_used,
            "method": self.method,
        }


@dataclass(frozen=True)
class PressureFunctionSample:
    q: tuple[float, ...]
    value: float
    gradient: tuple[float, ...]
    gradient_method: str  # analytic_depth1 | finite_difference
    enclosure: PressureEnclosure


def _is_depth1(p: CylinderPotential) -> bool:
    return isinstance(p, FiniteDepthPotential) and p.depth == 1


def depth1_cascade_tables(
    p: FiniteDepthPotential, chain: FactorChain, weights: WeightVector
) -> list[np.ndarray]:
    """Per-symbol log tables of the full chain of pushes of a depth-1 potential."""
    if not _is_depth1(p):
        raise ModelError("cascade tables need a depth-1 potential")
    return [q.table for q in push_chain(p, chain, weights)]


def pressure_closed_form_depth1(
    p: FiniteDepthPotential, chain: FactorChain, weights: WeightVector
) -> PressureEnclosure:
    """Exact pressure of a depth-1 potential: cascade the per-symbol tables."""
    tables = depth1_cascade_tables(p, chain, weights)
    a_top = weights.partial[-1]
    val = a_top * lse_tree(tables[-1] / a_top)
    return PressureEnclosure(val, val, val, 1, "closed_form")


def depth1_gibbs_log_table(
    p: FiniteDepthPotential, chain: FactorChain, weights: WeightVector
):
    """(log single-symbol masses, pressure, cascade tables) for depth-1 input.

    The masses exp(-P/A_k + log phi_a(s)) sum to one exactly: the cascade
    telescopes level by level.
    """
    tables = depth1_cascade_tables(p, chain, weights)
    part = weights.partial
    val = part[-1] * lse_tree(tables[-1] / part[-1])
    log_phi_a = tables[0] / part[0]
    for i in range(1, chain.k):
        coeff = 1.0 / part[i] - 1.0 / part[i - 1]
        log_phi_a = log_phi_a + coeff * tables[i][chain.tau_table(i)]
    return log_phi_a - val / part[-1], val, tables


def _enum_work(chain: FactorChain, top: CylinderPotential, n: int) -> float:
    return float(chain.alphabet_sizes[-1] ** n) * top.enum_cost(n)


def _top_level_sum(
    top: CylinderPotential,
    chain: FactorChain,
    weights: WeightVector,
    n: int,
    threads: int,
    budget: float,
    enumerate_top: bool,
) -> float:
    a_top = weights.partial[-1]
    if _is_depth1(top) and not enumerate_top:
        return n * a_top * lse_tree(top.table / a_top)
    if _enum_work(chain, top, n) > budget:
        raise BudgetError(f"enumeration at n={n} exceeds budget {budget:g}")
    n_top = chain.alphabet_sizes[-1]
    total = n_top**n
    pows = n_top ** np.arange(n - 1, -1, -1, dtype=np.int64)

    def chunk_value(bounds) -> float:
        start, stop = bounds
        codes = np.arange(start, stop, dtype=np.int64)
        words = (codes[:, None] // pows[None, :]) % n_top
        return lse_tree(top.log_phi_words(words) / a_top)

    jobs = [(s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    if threads > 1:
        # fixed chunking plus ordered reduction keeps the result bitwise
        # independent of the worker count
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk_value, jobs))
    else:
        parts = [chunk_value(j) for j in jobs]
    return a_top * lse_tree(parts)


def cascaded_log_sum(
    p: CylinderPotential,
    chain: FactorChain,
    weights: WeightVector,
    n: int,
    threads: int = 1,
    budget: float = DEFAULT_BUDGET,
    enumerate_top: bool = False,
) -> float:
    """s_n: log of the level-k cylinder sum of the fully pushed potential.

    Depth-1 potentials cascade in closed form unless enumeration is forced;
    anything deeper enumerates the top-level words (budget permitting).
    """
    if n < 1:
        raise ModelError("word length must be positive")
    top = push_chain(p, chain, weights)[-1]
    return _top_level_sum(top, chain, weights, n, threads, budget, enumerate_top)


def _aitken(t: list[float]) -> float:
    for k in range(len(t) - 3, -1, -1):
        d2 = t[k + 2] - 2.0 * t[k + 1] + t[k]
        if abs(d2) >= _AITKEN_GUARD:
            return t[k] - (t[k + 1] - t[k]) ** 2 / d2
    return t[-1]


def _enclosure_from_sequence(s_vals: list[float], ns: list[int], defect: float):
    lo = -math.inf
    hi = math.inf
    for s, n in zip(s_vals, ns):
        pad = _FLOAT_PAD * (1.0 + abs(s))
        lo = max(lo, (s - defect - pad) / n)
        hi = min(hi, (s + defect + pad) / n)
    t = [s / n for s, n in zip(s_vals, ns)]
    # consecutive differences shed the O(1) boundary term of s_n and usually
    # converge geometrically, which is exactly what Aitken extrapolates well;
    # plain s_n/n would keep an O(1/n) bias that Aitken only halves
    base = [s_vals[j + 1] - s_vals[j] for j in range(len(s_vals) - 1)] or t
    est = min(max(_aitken(base), lo), hi)
    return est, lo, hi, base


def _pressure_enclosure(
    p: CylinderPotential,
    chain: FactorChain,
    weights: WeightVector,
    n_max: int | None,
    budget: float,
    threads: int,
):
    top = push_chain(p, chain, weights)[-1]
    cap = 12 if n_max is None else int(n_max)
    ns = []
    for n in range(1, cap + 1):
        if _enum_work(chain, top, n) > budget:
            break
        ns.append(n)
    if len(ns) < 2:
        raise BudgetError("budget exhausted before n=2; no enclosure possible")
    s_vals = [
        _top_level_sum(top, chain, weights, n, threads, budget, enumerate_top=True)
        for n in ns
    ]
    est, lo, hi, t = _enclosure_from_sequence(s_vals, ns, p.qm_log_constant)
    return PressureEnclosure(est, lo, hi, ns[-1], "enclosure"), t


def pressure(
    p: CylinderPotential,
    chain: FactorChain,
    weights: WeightVector,
    n_max: int | None = None,
    budget: float = DEFAULT_BUDGET,
    method: str = "auto",
    threads: int = 1,
) -> PressureEnclosure:
    """Weighted pressure with a certified interval.

    method='auto' answers depth-1 potentials in closed form; 'enclosure'
    always builds the s_n sequence by top-level enumeration.
    """
    if method not in ("auto", "enclosure"):
        raise ModelError(f"unknown pressure method {method!r}")
    if method == "auto" and _is_depth1(p):
        return pressure_closed_form_depth1(p, chain, weights)
    enc, _ = _pressure_enclosure(p, chain, weights, n_max, budget, threads)
    return enc


def _pressure_value(ps, chain, weights, q, n_max, budget, threads) -> PressureEnclosure:
    combo = linear_combination(ps, q)
    if _is_depth1(combo):
        return pressure_closed_form_depth1(combo, chain, weights)
    enc, _ = _pressure_enclosure(combo, chain, weights, n_max, budget, threads)
    return enc


def pressure_function(
    ps: list[FiniteDepthPotential],
    chain: FactorChain,
    weights: WeightVector,
    q,
    h: float = 1e-4,
    n_max: int | None = None,
    budget: float = DEFAULT_BUDGET,
    threads: int = 1,
) -> PressureFunctionSample:
    """Sample Q(q) = pressure of sum_i q_i Phi_i together with its gradient.

    All inputs depth-1: the gradient is the vector of equilibrium averages of
    the component tables, exact.  Otherwise: Richardson-extrapolated central
    differences of the enclosure estimate, with a guard that refuses steps
    smaller than the estimate's own uncertainty.
    """
    q = tuple(float(x) for x in np.atleast_1d(q))
    if len(q) != len(ps):
        raise ModelError("need one coordinate per potential")
    combo = linear_combination(ps, q)
    if _is_depth1(combo) and all(_is_depth1(p) for p in ps):
        log_p, val, _ = depth1_gibbs_log_table(combo, chain, weights)
        # true masses never exceed one; the clip only removes cancellation
        # noise at extreme q where the cascade sums lose absolute precision
        masses = np.exp(np.minimum(log_p, 0.0))
        grad = tuple(float(masses @ p.table) for p in ps)
        enc = PressureEnclosure(val, val, val, 1, "closed_form")
        return PressureFunctionSample(q, val, grad, "analytic_depth1", enc)

    enc, t_seq = _pressure_enclosure(combo, chain, weights, n_max, budget, threads)
    if len(t_seq) >= 2:
        est_err = max(abs(enc.estimate - t_seq[-1]), abs(t_seq[-1] - t_seq[-2]))
    else:
        est_err = enc.width()
    if min(enc.width(), 2.0 * est_err) > h:
        raise EnclosureWidthError(
            "pressure uncertainty exceeds the difference step h; raise n_max"
        )

    def value_at(qq) -> float:
        return _pressure_value(ps, chain, weights, qq, n_max, budget, threads).estimate

    grad = []
    for i in range(len(q)):
        deltas = {}
        for step in (h, h / 2.0):
            qp = list(q)
            qm = list(q)
            qp[i] += step
            qm[i] -= step
            deltas[step] = (value_at(qp) - value_at(qm)) / (2.0 * step)
        grad.append((4.0 * deltas[h / 2.0] - deltas[h]) / 3.0)
    return PressureFunctionSample(q, enc.estimate, tuple(grad), "finite_difference", enc)


@dataclass(frozen=True)
class ConvexityProbe:
    verdict: str  # affine_within_tol | strictly_convex
    max_chord_deviation: float
    tolerance: float
    ts: tuple[float, ...]
    values: tuple[float, ...]


def convexity_probe(
    ps: list[FiniteDepthPotential],
    chain: FactorChain,
    weights: WeightVector,
    direction,
    q0=None,
    span: float = 1.0,
    samples: int = 9,
    n_max: int | None = None,
    budget: float = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConvexityProbe:
    """Sample the pressure along a line and compare against its chord.

    The deviation tolerance comes from the sampled enclosure widths, so a
    flat answer means affine up to everything this computation can certify.
    """
    direction = np.asarray(direction, dtype=float)
    q0 = np.zeros(len(ps)) if q0 is None else np.asarray(q0, dtype=float)
    if direction.shape != (len(ps),) or q0.shape != (len(ps),):
        raise ModelError("direction and base point must match the potential count")
    if samples < 3:
        raise ModelError("need at least three samples")
    ts = np.linspace(-span, span, samples)
    encs = [
        _pressure_value(ps, chain, weights, q0 + t * direction, n_max, budget, threads)
        for t in ts
    ]
    vals = np.array([e.estimate for e in encs])
    tol = 2.0 * max(e.width() for e in encs) + 1e-9
    chord = vals[0] + (vals[-1] - vals[0]) * (ts - ts[0]) / (ts[-1] - ts[0])
    dev = float(np.max(np.abs(vals - chord)))
    verdict = "affine_within_tol" if dev <= tol else "strictly_convex"
    return ConvexityProbe(verdict, dev, tol, tuple(ts), tuple(vals))
