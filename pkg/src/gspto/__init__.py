"""Derivative-free global maximization via power-transformed Gaussian smoothing.

The core method samples around the current iterate, reweights the samples by a
power (or exponential-power) transform of their fitness, and ascends the
resulting smoothed landscape. Large powers concentrate the smoothed maximizer
near the true global maximizer, which is what lets the method escape local
optima. Homotopy and forward-difference baselines, a quadrature oracle for
desk-scale verification, and an experiment harness ship alongside.
"""

from .errors import (
    AnchorError,
    AssumptionViolationError,
    ConfigError,
    ExternalObjectiveError,
    GsptoError,
    InvalidInputError,
    InvalidParameterError,
    NegativeFitnessError,
    QuadratureError,
    RunAbortedError,
)
from .estimators import (
    GradientEstimate,
    gspto_gradient,
    homotopy_gradient,
    zo_sgd_gradient,
)
from .external import ExternalScorer, external_objective
from .kernels import BACKEND
from .objectives import (
    AffineLogitMap,
    AttackLossParams,
    ObjectiveSpec,
    ackley,
    ackley_objective,
    attack_margin,
    attack_objective,
    build_objective,
    cw_attack_loss,
    make_affine_instance,
    quadratic_bowl,
    quadratic_objective,
    rosenbrock,
    rosenbrock_objective,
    two_log,
    two_log_objective,
)
from .optimizers import (
    HomotopyParams,
    InitialPoint,
    LearningRateSchedule,
    OptimizerConfig,
    RunTrace,
    run,
    run_gspto,
    run_std_homotopy,
    run_zo_sgd,
    schedule_value,
)
from .oracle import (
    QuadratureGrid,
    SignConditionReport,
    TheoryConstants,
    argmax_F_scan,
    check_sign_condition,
    estimate_threshold_N,
    grid_for,
    quadrature_F,
    quadrature_F_batch,
    quadrature_grad_F,
    quadrature_grad_F_batch,
    theory_constants,
)
from .samplers import RngStream, sample_gaussian, sample_unit_sphere
from .transforms import EPGS, PGS, TransformMode, relative_weight, transform

__version__ = "0.1.0"

__all__ = [
    "AffineLogitMap",
    "AnchorError",
    "AssumptionViolationError",
    "AttackLossParams",
    "BACKEND",
    "ConfigError",
    "EPGS",
    "ExternalObjectiveError",
    "ExternalScorer",
    "GradientEstimate",
    "GsptoError",
    "HomotopyParams",
    "InitialPoint",
    "InvalidInputError",
    "InvalidParameterError",
    "LearningRateSchedule",
    "NegativeFitnessError",
    "ObjectiveSpec",
    "OptimizerConfig",
    "PGS",
    "QuadratureError",
    "QuadratureGrid",
    "RngStream",
    "RunAbortedError",
    "RunTrace",
    "SignConditionReport",
    "TheoryConstants",
    "TransformMode",
    "ackley",
    "ackley_objective",
    "argmax_F_scan",
    "attack_margin",
    "attack_objective",
    "build_objective",
    "check_sign_condition",
    "cw_attack_loss",
    "estimate_threshold_N",
    "external_objective",
    "grid_for",
    "gspto_gradient",
    "homotopy_gradient",
    "make_affine_instance",
    "quadratic_bowl",
    "quadratic_objective",
    "quadrature_F",
    "quadrature_F_batch",
    "quadrature_grad_F",
    "quadrature_grad_F_batch",
    "relative_weight",
    "rosenbrock",
    "rosenbrock_objective",
    "run",
    "run_gspto",
    "run_std_homotopy",
    "run_zo_sgd",
    "sample_gaussian",
    "sample_unit_sphere",
    "schedule_value",
    "theory_constants",
    "transform",
    "two_log",
    "two_log_objective",
    "zo_sgd_gradient",
]
