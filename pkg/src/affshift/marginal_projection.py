"""Maximum-weighted-entropy measure with a prescribed block marginal.

Dual formulation: over potentials q indexed by the n-blocks, the objective

    G(q) = P_a(q) - <p, q> + (sum q)^2

is smooth and convex, its pressure gradient is the vector of equilibrium
n-block masses, and grad G = (masses - p) + 2 (sum q) 1.  The two parts are
orthogonal (masses and p both sum to one), so a stationary point matches
the marginal exactly and lands on the sum-zero gauge slice; the quadratic
term only pins down the additive constant the pressure is blind to.

The optimizer therefore returns the equilibrium measure of the dual
potential q*, which maximizes weighted entropy among invariant measures
with level-1 n-block marginal p.  For n = 1 everything is closed form per
iteration and the result is an exact product measure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .equilibrium import WeightedGibbsMeasure
from .errors import ConstraintError, IterationLimitError, ModelError
from .potential import FiniteDepthPotential
from .pressure import DEFAULT_BUDGET, depth1_gibbs_log_table, pressure
from .shift_space import FactorChain, WeightVector

_SIMPLEX_TOL = 1e-10
_SHIFT_TOL = 1e-10


@dataclass(frozen=True)
class MarginalConstraint:
    """Target distribution of level-1 n-blocks, flat in big-endian order."""

    n: int
    p: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.p, dtype=float)
        if self.n < 1:
            raise ConstraintError("block length must be at least one")
        if v.ndim != 1 or v.size < 1:
            raise ConstraintError("marginal must be a flat vector")
        if np.any(v <= 0):
            raise ConstraintError("marginal must be strictly positive")
        if abs(v.sum() - 1.0) > _SIMPLEX_TOL:
            raise ConstraintError("marginal must sum to one")
        if self.n >= 2:
            size = v.size
            base = round(size ** (1.0 / self.n))
            if base**self.n != size:
                raise ConstraintError("marginal size is not a power of the alphabet")
            cube = v.reshape((base,) * self.n)
            left = cube.sum(axis=0).reshape(-1)
            right = cube.sum(axis=self.n - 1).reshape(-1)
            if np.max(np.abs(left - right)) > _SHIFT_TOL:
                raise ConstraintError("marginal is not shift-consistent")

    def alphabet_size(self) -> int:
        return round(len(self.p) ** (1.0 / self.n)) if self.n > 1 else len(self.p)


@dataclass(frozen=True)
class ProjectionResult:
    q: tuple[float, ...]
    entropy: float
    marginal_error: float
    iterations: int
    measure: WeightedGibbsMeasure
    status: str


def project(
    constraint: MarginalConstraint,
    chain: FactorChain,
    weights: WeightVector,
    gtol: float = 1e-8,
    maxiter: int = 500,
    fd_step: float = 1e-3,
    accept_tol: float | None = None,
    n_max: int | None = None,
    budget: float = DEFAULT_BUDGET,
    threads: int = 1,
) -> ProjectionResult:
    """Entropy-maximizing equilibrium measure matching the block marginal."""
    n = constraint.n
    n1 = chain.alphabet_sizes[0]
    target = np.asarray(constraint.p, dtype=float)
    if constraint.alphabet_size() != n1:
        raise ModelError("marginal alphabet does not match the chain")
    if accept_tol is None:
        accept_tol = 1e-7 if n == 1 else 1e-4

    def value_of(q: np.ndarray) -> float:
        pot = FiniteDepthPotential(1, n, q)
        if n == 1:
            _, val, _ = depth1_gibbs_log_table(pot, chain, weights)
            return val
        return pressure(pot, chain, weights, n_max=n_max, budget=budget, threads=threads).estimate

    def masses_of(q: np.ndarray) -> np.ndarray:
        if n == 1:
            log_m, _, _ = depth1_gibbs_log_table(
                FiniteDepthPotential(1, 1, q), chain, weights
            )
            return np.exp(log_m)
        grad = np.empty_like(q)
        for i in range(q.size):
            qp = q.copy()
            qm = q.copy()
            qp[i] += fd_step
            qm[i] -= fd_step
            grad[i] = (value_of(qp) - value_of(qm)) / (2.0 * fd_step)
        return grad

    def fg(q: np.ndarray):
        val = value_of(q)
        masses = masses_of(q)
        s = q.sum()
        return val - target @ q + s * s, masses - target + 2.0 * s

    q0 = np.log(target)
    q0 -= q0.mean()
    res = scipy.optimize.minimize(
        fg, q0, jac=True, method="BFGS", options={"gtol": gtol, "maxiter": maxiter}
    )
    q_star = res.x
    final_masses = masses_of(q_star)
    marginal_error = float(np.max(np.abs(final_masses - target)))
    if marginal_error > accept_tol:
        raise IterationLimitError(
            f"projection stalled: marginal error {marginal_error:.2e} after {res.nit} iterations"
        )
    val = value_of(q_star)
    entropy = float(val - target @ q_star)
    measure = WeightedGibbsMeasure(
        FiniteDepthPotential(1, n, q_star), chain, weights,
        n_max=n_max, budget=budget, threads=threads,
    )
    return ProjectionResult(
        tuple(map(float, q_star)),
        entropy,
        marginal_error,
        int(res.nit),
        measure,
        "converged",
    )
