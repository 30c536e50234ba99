"""Dimension spectra: Birkhoff level sets, local dimensions, vector averages.

Everything here is a Legendre transform of the weighted pressure.  The
scalar spectrum is traced parametrically: alpha(q) = Q'(q) and
f(alpha(q)) = Q(q) - q Q'(q) with Q(q) the pressure of q times the
observable.  Level sets of local dimensions of a product equilibrium state
reduce to Birkhoff level sets of one per-symbol observable built from the
level marginals, so they reuse the same machinery.

The metric normalization bakes the weights into distances, so dimensions
of measures are weighted entropies and the ambient dimension is the
pressure of the zero potential; on the two-level chain modeling a m1 x m2
grid carpet the zero-potential value reproduces the classical formula.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .equilibrium import BracketedValue, InvariantMeasureSpec, WeightedGibbsMeasure, weighted_entropy
from .errors import ModelError
from .potential import CylinderPotential, FiniteDepthPotential, zero_potential
from .pressure import (
    DEFAULT_BUDGET,
    pressure_closed_form_depth1,
    pressure_function,
)
from .shift_space import FactorChain, WeightVector

_VS_GTOL = 1e-8
_VS_MAXITER = 500
_VS_Q_BOUND = 1e6


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Spectrum:
    """Sampled (q, alpha, f) curve of a multifractal spectrum."""

    kind: str  # birkhoff | local_dimension
    q: tuple[float, ...]
    alpha: tuple[float, ...]
    f: tuple[float, ...]
    gradient_method: str

    def to_csv(self, dedup: bool = False) -> str:
        """CSV rows q,alpha,f; dedup drops rows repeating the previous point."""
        lines = ["q,alpha,f"]
        prev = None
        for q, a, f in zip(self.q, self.alpha, self.f):
            row = (_fmt(a), _fmt(f))
            if dedup and row == prev:
                continue
            lines.append("%s,%s,%s" % (_fmt(q), row[0], row[1]))
            prev = row
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "gradient_method": self.gradient_method,
            "q": list(self.q),
            "alpha": list(self.alpha),
            "f": list(self.f),
        }


def birkhoff_spectrum(
    observable: CylinderPotential,
    chain: FactorChain,
    weights: WeightVector,
    q_range: tuple[float, float] = (-20.0, 20.0),
    q_steps: int = 201,
    n_max: int | None = None,
    budget: float = DEFAULT_BUDGET,
    threads: int = 1,
) -> Spectrum:
    """Dimension spectrum of Birkhoff-average level sets of one observable."""
    if observable.level != 1:
        raise ModelError("birkhoff observables live on level 1")
    if q_steps < 1:
        raise ModelError("need at least one sample")
    lo, hi = float(q_range[0]), float(q_range[1])
    qs = np.linspace(lo, hi, q_steps) if q_steps > 1 else np.array([0.5 * (lo + hi)])
    alphas, fs, method = [], [], "analytic_depth1"
    for q in qs:
        s = pressure_function(
            [observable], chain, weights, (float(q),),
            n_max=n_max, budget=budget, threads=threads,
        )
        alphas.append(s.gradient[0])
        fs.append(s.value - float(q) * s.gradient[0])
        method = s.gradient_method
    return Spectrum("birkhoff", tuple(map(float, qs)), tuple(alphas), tuple(fs), method)


@dataclass(frozen=True)
class VectorSpectrumPoint:
    alpha: tuple[float, ...]
    f: float
    q: tuple[float, ...]
    status: str  # ok | outside_domain
    iterations: int


def vector_spectrum(
    observables: list[CylinderPotential],
    chain: FactorChain,
    weights: WeightVector,
    alpha_targets,
    n_max: int | None = None,
    budget: float = DEFAULT_BUDGET,
    threads: int = 1,
) -> list[VectorSpectrumPoint]:
    """Joint-level-set dimensions: f(alpha) = inf_q (Q(q) - q . alpha).

    The infimum is found with BFGS on the convex objective.  Targets outside
    the closure of the gradient range make the objective unbounded below;
    runs that fail to settle are reported with status 'outside_domain'.
    """
    d = len(observables)
    if d < 1:
        raise ModelError("need at least one observable")

    def fg(qv, target):
        s = pressure_function(
            list(observables), chain, weights, qv,
            n_max=n_max, budget=budget, threads=threads,
        )
        grad = np.asarray(s.gradient) - target
        return s.value - float(np.dot(qv, target)), grad

    out = []
    for target in np.atleast_2d(np.asarray(alpha_targets, dtype=float)):
        if target.shape != (d,):
            raise ModelError("each target needs one coordinate per observable")
        res = scipy.optimize.minimize(
            fg, np.zeros(d), args=(target,), jac=True, method="BFGS",
            options={"gtol": _VS_GTOL, "maxiter": _VS_MAXITER},
        )
        its = int(res.nit)
        if not res.success:
            res2 = scipy.optimize.minimize(
                fg, np.clip(res.x, -10.0, 10.0), args=(target,), jac=True,
                method="BFGS", options={"gtol": _VS_GTOL, "maxiter": _VS_MAXITER},
            )
            if res2.fun <= res.fun:
                res = res2
            its += int(res2.nit)
        settled = (
            float(np.max(np.abs(res.jac))) <= 10.0 * _VS_GTOL
            and float(np.max(np.abs(res.x))) <= _VS_Q_BOUND
        )
        out.append(
            VectorSpectrumPoint(
                tuple(map(float, target)),
                float(res.fun) if settled else -np.inf,
                tuple(map(float, res.x)),
                "ok" if settled else "outside_domain",
                its,
            )
        )
    return out


def _marginal_log_tables(measure, chain: FactorChain) -> list[np.ndarray]:
    if isinstance(measure, WeightedGibbsMeasure):
        if measure.mode != "exact_depth1":
            raise ModelError("local dimensions need an exact product measure")
        if measure.chain is not chain:
            raise ModelError("measure was built on a different chain")
        return list(measure.log_level_marginals)
    if isinstance(measure, InvariantMeasureSpec):
        if measure.kind != "bernoulli":
            raise ModelError("local dimensions are implemented for product measures")
        p = np.asarray(measure.p, dtype=float)
        if np.any(p <= 0):
            raise ModelError("local dimensions need strictly positive weights")
        tables = []
        cur = p
        for i in range(chain.k):
            if i > 0:
                nxt = np.zeros(chain.alphabet_sizes[i])
                np.add.at(nxt, np.asarray(chain.factor_maps[i - 1], dtype=np.int64), cur)
                cur = nxt
            tables.append(np.log(cur))
        return tables
    raise ModelError("unsupported measure object")


def local_dimension_observable(
    measure, chain: FactorChain, weights: WeightVector
) -> FiniteDepthPotential:
    """Per-symbol observable whose Birkhoff averages are local dimensions.

    psi(s) = -sum_i a_i log q_i(tau_{i-1} s) with q_i the level-i marginal;
    the telescoped ball masses make the local dimension at x equal the
    Birkhoff average of psi whenever the per-level averages settle.
    """
    tables = _marginal_log_tables(measure, chain)
    n1 = chain.alphabet_sizes[0]
    psi = np.zeros(n1)
    for i in range(chain.k):
        psi -= weights.a[i] * tables[i][chain.tau_table(i)]
    return FiniteDepthPotential(1, 1, psi)


def local_dimension_spectrum(
    measure,
    chain: FactorChain,
    weights: WeightVector,
    q_range: tuple[float, float] = (-20.0, 20.0),
    q_steps: int = 201,
    n_max: int | None = None,
    budget: float = DEFAULT_BUDGET,
    threads: int = 1,
) -> Spectrum:
    """Spectrum of local dimensions of a product equilibrium state."""
    obs = local_dimension_observable(measure, chain, weights)
    spec = birkhoff_spectrum(
        obs, chain, weights, q_range=q_range, q_steps=q_steps,
        n_max=n_max, budget=budget, threads=threads,
    )
    return Spectrum("local_dimension", spec.q, spec.alpha, spec.f, spec.gradient_method)


def generic_set_dimension(
    measure, chain: FactorChain, weights: WeightVector, block_len: int = 8
) -> BracketedValue:
    """Dimension carried by almost every point: the weighted entropy."""
    if isinstance(measure, WeightedGibbsMeasure):
        measure = measure.to_measure_spec()
    return weighted_entropy(measure, chain, weights, block_len=block_len)


def dimension_of_space(chain: FactorChain, weights: WeightVector) -> float:
    """Hausdorff dimension of the whole space: zero-potential pressure."""
    z = zero_potential(1, chain.alphabet_sizes[0])
    return pressure_closed_form_depth1(z, chain, weights).estimate
