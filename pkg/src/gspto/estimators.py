"""Stochastic gradient estimators for the smoothed objectives.

All three estimators follow the displayed estimator convention of the method:
the Gaussian-smoothing estimate is ``(1/K) sum_k (x_k - mu) f_N(x_k)`` with no
``1/sigma**2`` factor (the exact score-function gradient would carry one; the
optimizers normalize the step, so only the direction matters, and the
quadrature oracle uses the same convention for comparability).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AnchorError, InvalidParameterError
from .objectives import ObjectiveSpec
from .samplers import as_generator
from .transforms import PGS, TransformMode


@dataclass
class GradientEstimate:
    """A sampled gradient with its bookkeeping.

    ``degenerate`` marks estimates that carry no usable direction (every
    sample weight was zero, or the vector cancelled exactly); optimizers treat
    those as "no movement this iteration" rather than dividing by zero.
    """

    vector: np.ndarray
    norm: float
    samples_used: int
    anchor_fitness: float
    degenerate: bool = False


def _validate_common(objective, mu, sigma, count):
    mu = np.ascontiguousarray(mu, dtype=float)
    if mu.shape != (objective.dimension,):
        raise InvalidParameterError(
            f"mu has shape {mu.shape}, objective lives in R^{objective.dimension}"
        )
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidParameterError(f"sigma must be a positive real, got {sigma}")
    if count < 1:
        raise InvalidParameterError(f"sample count must be >= 1, got {count}")
    return mu


def gspto_gradient(objective: ObjectiveSpec, mu, sigma, mode: TransformMode,
                   count, rng) -> GradientEstimate:
    """Power-transformed Gaussian-smoothing estimate at ``mu``.

    Samples ``count`` points from N(mu, sigma^2 I) and weights the offsets by
    the transformed fitness (zero outside the domain). Raises
    ``NegativeFitnessError`` if the pure power transform meets a negative
    in-domain fitness, and ``AnchorError`` when stable power weighting is
    requested at a point with nonpositive fitness.
    """
    mu = _validate_common(objective, mu, sigma, count)
    if mode.power <= 0:
        raise InvalidParameterError(f"optimizing transform power must be > 0, got {mode.power}")
    gen = as_generator(rng)
    z = gen.standard_normal((int(count), objective.dimension))
    f_mu = float(objective.eval(mu))
    if mode.kind == PGS and mode.stable_weighting and f_mu <= 0:
        raise AnchorError(f_mu)
    vector, weight_sum, _ = kernels.gspto_estimate(objective, z, mu, sigma, mode)
    norm = float(np.linalg.norm(vector))
    return GradientEstimate(
        vector=vector,
        norm=norm,
        samples_used=int(count),
        anchor_fitness=f_mu,
        degenerate=(weight_sum == 0.0 or norm == 0.0),
    )


def homotopy_gradient(objective: ObjectiveSpec, mu, sigma, count, rng) -> GradientEstimate:
    """Sphere-sampled smoothing estimate ``(1/K) sum (x_k - mu) f(x_k)``.

    Samples lie on the sphere of radius sigma around mu; the raw fitness is
    used directly (no transform, no domain rule).
    """
    mu = _validate_common(objective, mu, sigma, count)
    gen = as_generator(rng)
    z = gen.standard_normal((int(count), objective.dimension))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    v = z / norms
    f_mu = float(objective.eval(mu))
    vector = kernels.sphere_estimate(objective, v, mu, sigma, f_mu, forward_difference=False)
    norm = float(np.linalg.norm(vector))
    return GradientEstimate(
        vector=vector,
        norm=norm,
        samples_used=int(count),
        anchor_fitness=f_mu,
        degenerate=(norm == 0.0),
    )


def zo_sgd_gradient(objective: ObjectiveSpec, mu, sigma, count, rng) -> GradientEstimate:
    """Forward-difference estimate ``(1/K) sum (f(mu + sigma v) - f(mu)) v d / sigma``."""
    mu = _validate_common(objective, mu, sigma, count)
    gen = as_generator(rng)
    z = gen.standard_normal((int(count), objective.dimension))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    v = z / norms
    f_mu = float(objective.eval(mu))
    vector = kernels.sphere_estimate(objective, v, mu, sigma, f_mu, forward_difference=True)
    norm = float(np.linalg.norm(vector))
    return GradientEstimate(
        vector=vector,
        norm=norm,
        samples_used=int(count),
        anchor_fitness=f_mu,
        degenerate=(norm == 0.0),
    )
