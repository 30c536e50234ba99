"""Weighted thermodynamic formalism on chains of full shifts.

Symbolic models of self-affine sets: a chain of full shifts joined by
one-block factor maps, a weight per level, and cylinder potentials.  The
package computes weighted pressure with certified enclosures, exact
product-form equilibrium states for depth-1 potentials, dimension spectra,
and maximum-entropy measures under marginal constraints.
"""
from .equilibrium import (
    BracketedValue,
    InvariantMeasureSpec,
    WeightedGibbsMeasure,
    product_relation_check,
    pushed_entropy,
    quasi_bernoulli_diagnostic,
    weighted_entropy,
)
from .errors import (
    BudgetError,
    ConstraintError,
    EnclosureWidthError,
    IterationLimitError,
    ModelError,
)
from .marginal_projection import MarginalConstraint, ProjectionResult, project
from .multifractal import (
    Spectrum,
    VectorSpectrumPoint,
    birkhoff_spectrum,
    dimension_of_space,
    generic_set_dimension,
    local_dimension_observable,
    local_dimension_spectrum,
    vector_spectrum,
)
from .potential import (
    CylinderPotential,
    FiniteDepthPotential,
    cylinder_log_weight,
    lift_depth,
    linear_combination,
    push_chain,
    push_potential,
    weighted_potential,
    zero_potential,
)
from .pressure import (
    ConvexityProbe,
    PressureEnclosure,
    PressureFunctionSample,
    cascaded_log_sum,
    convexity_probe,
    pressure,
    pressure_function,
)
from .shift_space import (
    BallShape,
    FactorChain,
    WeightVector,
    Word,
    ball_shape,
    constraint_length,
    project_word,
    self_affine_metric,
)

__version__ = "0.1.0"

__all__ = [
    "BallShape",
    "BracketedValue",
    "BudgetError",
    "ConstraintError",
    "ConvexityProbe",
    "CylinderPotential",
    "EnclosureWidthError",
    "FactorChain",
    "FiniteDepthPotential",
    "InvariantMeasureSpec",
    "IterationLimitError",
    "MarginalConstraint",
    "ModelError",
    "PressureEnclosure",
    "PressureFunctionSample",
    "ProjectionResult",
    "Spectrum",
    "VectorSpectrumPoint",
    "WeightVector",
    "WeightedGibbsMeasure",
    "Word",
    "ball_shape",
    "birkhoff_spectrum",
    "cascaded_log_sum",
    "constraint_length",
    "convexity_probe",
    "cylinder_log_weight",
    "dimension_of_space",
    "generic_set_dimension",
    "lift_depth",
    "linear_combination",
    "local_dimension_observable",
    "local_dimension_spectrum",
    "pressure",
    "pressure_function",
    "product_relation_check",
    "project",
    "project_word",
    "push_chain",
    "push_potential",
    "pushed_entropy",
    "quasi_bernoulli_diagnostic",
    "self_affine_metric",
    "vector_spectrum",
    "weighted_entropy",
    "weighted_potential",
    "zero_potential",
]
