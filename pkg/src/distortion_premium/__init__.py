"""Distortion premia, robust premia over Wasserstein balls and density identification."""
# ruff: noqa: F401

__version__ = "0.1.0"

from .ambiguity import (
    AmbiguitySpec,
    RobustResult,
    approximating_family,
    continuity_bound,
    diagnose_boundedness,
    partial_coverage_bound,
    robust_ceq_lower_bound,
    robust_premium,
    robust_premium_r1,
    robust_premium_rp,
)
from .dist_core import (
    Bernoulli,
    DiscreteDistribution,
    EmpiricalDistribution,
    Exponential,
    Gamma,
    ShiftedDistribution,
    StepDistribution,
    Uniform,
    XL,
    CustomPayoff,
    Proportional,
    apply_transform,
    conjugate,
    make_rng,
    quantile,
    read_losses_csv,
    wasserstein,
    wasserstein_dp,
)
from .distortion import (
    AVaR,
    DistortionSpec,
    Identity,
    KusuokaMixture,
    MixtureMeasure,
    PiecewiseConstant,
    Power,
    PremiumQuote,
    SplineMix,
    StepMix,
    Wang,
    ceq_premium,
    distortion_from_json,
    distortion_premium,
    distortion_premium_analytic,
    generalized_premium,
    kusuoka_density,
    norms,
    premium,
    price_batch,
    reinsurer_table,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DistortionPremiumError,
    DomainError,
    NoFiniteBoundError,
    UnboundedPremiumError,
)
from .identification import (
    DesignMatrix,
    FitResult,
    StepBasis,
    build_spline_basis,
    build_spline_design,
    build_step_design,
    identify,
    simulate_study,
    solve_qp,
)
from .splines import SplineBasis
