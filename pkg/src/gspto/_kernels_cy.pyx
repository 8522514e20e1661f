# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: builtin objective evaluation fused with the sampled
gradient-estimate accumulation. Semantics mirror ``gspto._kernels_py``."""

import logging

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, log, pow, sqrt

cnp.import_array()

from .errors import NegativeFitnessError

_log = logging.getLogger(__name__)

cdef double TWO_PI = 6.283185307179586
cdef double EPS_GLOBAL = 1e-5
cdef double EPS_LOCAL = 1e-2
cdef double MAX_EXPONENT = 709.0  # exp() overflows just above this
cdef double MAX_FLOAT = 1.7976931348623157e308

KIND_IDS = {"ackley": 0, "rosenbrock": 1, "two_log": 2, "quadratic": 3}


cdef inline double _eval_point(int kind, const double* p, const double* x, Py_ssize_t d) noexcept nogil:
    cdef double s1 = 0.0, s2 = 0.0, diff
    cdef Py_ssize_t j
    if kind == 0:  # ackley, d == 2
        return 20.0 * exp(-0.2 * sqrt(0.5 * (x[0] * x[0] + x[1] * x[1]))) + exp(
            0.5 * (cos(TWO_PI * x[0]) + cos(TWO_PI * x[1]))
        )
    elif kind == 1:  # rosenbrock, d == 2
        diff = x[1] - x[0] * x[0]
        return -100.0 * diff * diff - (1.0 - x[0]) * (1.0 - x[0])
    elif kind == 2:  # two_log; p = [m1 | m2], length 2d
        for j in range(d):
            diff = x[j] - p[j]
            s1 += diff * diff
            diff = x[j] - p[d + j]
            s2 += diff * diff
        return -log(s1 + EPS_GLOBAL) - log(s2 + EPS_LOCAL)
    else:  # quadratic bowl
        for j in range(d):
            s1 += x[j] * x[j]
        return -0.5 * s1


def eval_batch(int kind, double[::1] params, double[:, ::1] X, double shift):
    """Fitness (shift included) at each row of X."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i
    out = np.empty(n)
    cdef double[::1] fv = out
    cdef const double* p = &params[0] if params.shape[0] else NULL
    with nogil:
        for i in range(n):
            fv[i] = _eval_point(kind, p, &X[i, 0], d) + shift
    return out


def gspto_estimate(double[:, ::1] z, double[::1] mu, double sigma,
                   int kind, double[::1] params, double shift, double box,
                   bint epgs, double power, bint stable):
    """Fused sample-evaluate-weight-accumulate step for builtin objectives.

    Returns (g, weight_sum, n_inside); see the numpy twin for the contract.
    """
    cdef Py_ssize_t K = z.shape[0], d = z.shape[1], k, j
    cdef const double* p = &params[0] if params.shape[0] else NULL

    fs_arr = np.empty(K)
    inside_arr = np.zeros(K, dtype=np.uint8)
    g_arr = np.zeros(d)
    cdef double[::1] fs = fs_arr
    cdef unsigned char[::1] inside = inside_arr
    cdef double[::1] g = g_arr

    cdef double xj, f, anchor = 0.0, w, e, w_sum = 0.0, neg_value = 0.0, w_max = 0.0
    cdef double scratch[64]
    cdef bint ok, have_anchor = 0, negative = 0
    cdef Py_ssize_t n_inside = 0, n_clamped = 0

    if d > 64:
        raise ValueError("compiled kernel supports dimension <= 64")

    with nogil:
        # Pass 1: sample point, fitness, domain test, running max fitness.
        for k in range(K):
            ok = 1
            for j in range(d):
                xj = mu[j] + sigma * z[k, j]
                scratch[j] = xj
                if fabs(xj) > box:
                    ok = 0
            inside[k] = ok
            if ok:
                f = _eval_point(kind, p, &scratch[0], d) + shift
                fs[k] = f
                n_inside += 1
                if not epgs and f < 0.0:
                    negative = 1
                    neg_value = f
                    break
                if (not have_anchor) or f > anchor:
                    anchor = f
                    have_anchor = 1

        # Pass 2: weights (overwriting the fitness scratch), then the weighted
        # direction sum. If any weight clamped, rescale all by the max so the
        # sum stays finite; the rescale is positive, so direction survives.
        if not negative and n_inside > 0:
            w_max = 0.0
            for k in range(K):
                if not inside[k]:
                    fs[k] = 0.0
                    continue
                f = fs[k]
                if stable:
                    if epgs:
                        w = exp(power * (f - anchor))
                    else:
                        w = 0.0 if anchor <= 0.0 else pow(f / anchor, power)
                else:
                    if epgs:
                        e = power * f
                        if e > MAX_EXPONENT:
                            w = MAX_FLOAT
                            n_clamped += 1
                        else:
                            w = exp(e)
                    else:
                        if f > 0.0 and power * log(f) > MAX_EXPONENT:
                            w = MAX_FLOAT
                            n_clamped += 1
                        else:
                            w = pow(f, power)
                fs[k] = w
                if w > w_max:
                    w_max = w
            for k in range(K):
                w = fs[k]
                if n_clamped > 0 and w_max > 0.0:
                    w /= w_max
                w_sum += w
                for j in range(d):
                    g[j] += z[k, j] * w
            for j in range(d):
                g[j] *= sigma / K

    if negative:
        raise NegativeFitnessError(neg_value)
    if n_clamped:
        _log.warning(
            "%d transform weights overflowed; clamping to largest finite float", n_clamped
        )
    if n_inside == 0:
        return g_arr, 0.0, 0
    return g_arr, w_sum, n_inside


def sphere_estimate(double[:, ::1] v, double[::1] mu, double sigma,
                    int kind, double[::1] params, double shift,
                    double f_mu, bint forward_difference):
    """Sphere-direction estimate for the homotopy and finite-difference baselines."""
    cdef Py_ssize_t K = v.shape[0], d = v.shape[1], k, j
    cdef const double* p = &params[0] if params.shape[0] else NULL
    g_arr = np.zeros(d)
    cdef double[::1] g = g_arr
    cdef double scratch[64]
    cdef double f, scale

    if d > 64:
        raise ValueError("compiled kernel supports dimension <= 64")

    with nogil:
        for k in range(K):
            for j in range(d):
                scratch[j] = mu[j] + sigma * v[k, j]
            f = _eval_point(kind, p, &scratch[0], d) + shift
            if forward_difference:
                f = f - f_mu
            for j in range(d):
                g[j] += v[k, j] * f
        scale = (d / (K * sigma)) if forward_difference else (sigma / K)
        for j in range(d):
            g[j] *= scale
    return g_arr
