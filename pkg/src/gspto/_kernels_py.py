"""Numpy implementation of the hot estimator kernels.

This is the fallback backend and also the only path for objectives the
compiled core does not know (external scorers, attack losses, custom domain
predicates). Signatures mirror the compiled module's semantics; see
``gspto.kernels`` for dispatch.
"""

from __future__ import annotations

import logging
import sys

import numpy as np

from .errors import NegativeFitnessError
from .transforms import PGS

log = logging.getLogger(__name__)

_MAX_FLOAT = sys.float_info.max


def _clamp_nonfinite(w):
    """Clamp overflowed weights, then rescale by the max so the weighted sum
    stays finite; the rescale is positive, so the update direction survives."""
    bad = ~np.isfinite(w)
    if np.any(bad):
        log.warning("%d transform weights overflowed; clamping to largest finite float", bad.sum())
        w[bad] = _MAX_FLOAT
        w /= w.max()
    return w


def gspto_estimate(z, mu, sigma, objective, mode):
    """One fused Gaussian-smoothing gradient step.

    ``z`` holds standard-normal draws, shape (K, d); the sample points are
    ``mu + sigma * z``. Returns ``(g, weight_sum, n_inside)`` with
    ``g = (1/K) sum_k (x_k - mu) * w_k``. Out-of-domain samples get weight 0.
    With stable weighting the weights are anchored at the best sampled fitness
    (a positive rescaling, so normalized updates are unchanged); otherwise they
    are the raw transforms, clamped at the largest finite float on overflow.
    """
    K = z.shape[0]
    x = mu + sigma * z
    fs = objective.evaluate_batch(x)
    inside = objective.contains_batch(x)
    n_inside = int(inside.sum())

    if mode.kind == PGS and n_inside and np.any(fs[inside] < 0.0):
        offending = fs[inside][fs[inside] < 0.0]
        raise NegativeFitnessError(float(offending[0]))

    if n_inside == 0:
        return np.zeros(mu.shape[0]), 0.0, 0

    if mode.stable_weighting:
        anchor = float(fs[inside].max())
        if mode.kind == PGS:
            if anchor <= 0.0:
                w = np.zeros(K)  # every in-domain fitness is 0; no signal
            else:
                w = np.where(inside, (np.maximum(fs, 0.0) / anchor) ** mode.power, 0.0)
        else:
            with np.errstate(under="ignore"):
                w = np.where(inside, np.exp(mode.power * (fs - anchor)), 0.0)
    else:
        with np.errstate(over="ignore", under="ignore"):
            if mode.kind == PGS:
                w = np.where(inside, np.maximum(fs, 0.0) ** mode.power, 0.0)
            else:
                w = np.where(inside, np.exp(mode.power * fs), 0.0)
        w = _clamp_nonfinite(w)

    g = (sigma / K) * (z.T @ w)
    return g, float(w.sum()), n_inside


def sphere_estimate(v, mu, sigma, objective, f_mu, forward_difference):
    """Sphere-direction gradient estimates shared by the two baselines.

    ``v`` holds unit directions, shape (K, d); samples are ``mu + sigma * v``.
    With ``forward_difference`` the per-sample weight is
    ``(f(x_k) - f(mu)) * d / sigma`` (the finite-difference estimator);
    without it the weight is the raw fitness ``f(x_k)`` and the direction
    factor ``x_k - mu`` contributes ``sigma * v_k``. No domain rule applies.
    """
    K, d = v.shape
    x = mu + sigma * v
    fs = objective.evaluate_batch(x)
    if forward_difference:
        return (d / (K * sigma)) * (v.T @ (fs - f_mu))
    return (sigma / K) * (v.T @ fs)


def eval_batch(objective, X):
    return objective.evaluate_batch(X)
