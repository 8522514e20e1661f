"""The iteration loops: PGS/EPGS ascent, standard homotopy, and ZO-SGD.

A run is strictly sequential and fully determined by (objective, config): the
random stream is derived from ``(config.seed, config.stream)``, so reruns give
bitwise-identical traces on the same build and backend.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    AnchorError,
    InvalidParameterError,
    NegativeFitnessError,
    RunAbortedError,
)
from .estimators import gspto_gradient, homotopy_gradient, zo_sgd_gradient
from .objectives import ObjectiveSpec
from .samplers import RngStream
from .transforms import TransformMode

log = logging.getLogger(__name__)

GSPTO_ALGORITHMS = ("pgs", "epgs")
ALGORITHMS = GSPTO_ALGORITHMS + ("std_homotopy", "zo_sgd")


@dataclass(frozen=True)
class LearningRateSchedule:
    """Step-size schedule alpha_t.

    kinds:
      - ``constant``:   alpha_t = alpha0
      - ``hyperbolic``: alpha_t = 1000 * alpha0 / (1000 + t)
      - ``power``:      alpha_t = alpha0 * (t + 1) ** -(1/2 + gamma), gamma in (0, 1/2),
        which makes sum(alpha_t) diverge while sum(alpha_t^2) converges.
    """

    kind: str
    alpha0: float = 1.0
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("constant", "hyperbolic", "power"):
            raise InvalidParameterError(f"unknown schedule kind {self.kind!r}")
        if not (np.isfinite(self.alpha0) and self.alpha0 > 0):
            raise InvalidParameterError(f"alpha0 must be a positive real, got {self.alpha0}")
        if self.kind == "power":
            if self.gamma is None or not (0.0 < self.gamma < 0.5):
                raise InvalidParameterError(
                    f"power schedule needs gamma in (0, 1/2), got {self.gamma}"
                )


def schedule_value(schedule: LearningRateSchedule, t: int) -> float:
    if t < 0:
        raise InvalidParameterError(f"iteration index must be >= 0, got {t}")
    if schedule.kind == "constant":
        return schedule.alpha0
    if schedule.kind == "hyperbolic":
        return 1000.0 * schedule.alpha0 / (1000.0 + t)
    return schedule.alpha0 * (t + 1.0) ** -(0.5 + schedule.gamma)


@dataclass(frozen=True)
class InitialPoint:
    """Per-trial starting point distribution.

    ``fixed`` uses ``point`` verbatim; ``gaussian`` draws from
    N(center, cov_scale * I); ``uniform`` draws each coordinate from
    [low, high].
    """

    kind: str = "fixed"
    point: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    cov_scale: float = 0.01
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fixed", "gaussian", "uniform"):
            raise InvalidParameterError(f"unknown init kind {self.kind!r}")
        if self.kind == "fixed" and self.point is None:
            raise InvalidParameterError("fixed init needs a point")
        if self.kind == "gaussian":
            if self.center is None:
                raise InvalidParameterError("gaussian init needs a center")
            if not self.cov_scale >= 0:
                raise InvalidParameterError(f"cov_scale must be >= 0, got {self.cov_scale}")
        if self.kind == "uniform" and not self.low < self.high:
            raise InvalidParameterError(f"uniform init needs low < high, got [{self.low}, {self.high}]")

    def draw(self, gen: np.random.Generator, dimension: int) -> np.ndarray:
        if self.kind == "fixed":
            point = np.asarray(self.point, dtype=float)
            if point.shape != (dimension,):
                raise InvalidParameterError(
                    f"fixed init point has shape {point.shape}, need ({dimension},)"
                )
            return point.copy()
        if self.kind == "gaussian":
            center = np.asarray(self.center, dtype=float)
            return center + np.sqrt(self.cov_scale) * gen.standard_normal(dimension)
        return gen.uniform(self.low, self.high, dimension)


@dataclass(frozen=True)
class HomotopyParams:
    """Extras of the double-loop homotopy: outer decay and inner stopping."""

    sigma_updates: int  # max number of sigma decays (outer iterations)
    inner_updates: int  # max mu-updates per sigma value
    tolerance: int  # consecutive non-improvements allowed before decaying sigma
    decay: float  # multiplicative sigma decay, in (0, 1)

    def __post_init__(self):
        if self.sigma_updates < 0:
            raise InvalidParameterError("sigma_updates must be >= 0")
        if self.inner_updates < 1:
            raise InvalidParameterError("inner_updates must be >= 1")
        if self.tolerance < 1:
            raise InvalidParameterError("tolerance must be >= 1")
        if not 0.0 < self.decay < 1.0:
            raise InvalidParameterError(f"decay must be in (0, 1), got {self.decay}")


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str
    sigma: float
    samples: int  # points per gradient estimate
    updates: int  # total mu-update budget
    schedule: LearningRateSchedule
    init: InitialPoint
    seed: int = 0
    stream: int = 0
    mode: Optional[TransformMode] = None  # pgs/epgs only
    homotopy: Optional[HomotopyParams] = None  # std_homotopy only
    normalize_updates: bool = True  # pgs/epgs only; the baselines fix their own rule

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidParameterError(f"unknown algorithm {self.algorithm!r}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParameterError(f"sigma must be a positive real, got {self.sigma}")
        if self.samples < 1:
            raise InvalidParameterError(f"samples must be >= 1, got {self.samples}")
        if self.updates < 1:
            raise InvalidParameterError(f"updates must be >= 1, got {self.updates}")
        gspto = self.algorithm in GSPTO_ALGORITHMS
        if gspto:
            if self.mode is None:
                raise InvalidParameterError(f"{self.algorithm} needs a TransformMode")
            if self.mode.kind != self.algorithm:
                raise InvalidParameterError(
                    f"algorithm {self.algorithm!r} got a {self.mode.kind!r} transform"
                )
        elif self.mode is not None:
            raise InvalidParameterError(f"{self.algorithm} takes no TransformMode")
        if (self.homotopy is not None) != (self.algorithm == "std_homotopy"):
            raise InvalidParameterError("homotopy extras are required iff algorithm is std_homotopy")


@dataclass
class RunTrace:
    """Everything one run recorded.

    ``iterates[t]``/``fitness[t]`` cover t = 0..T (initial point included);
    the step arrays cover the T updates. ``fitness`` holds the objective as
    evaluated, i.e. including any configured shift.
    """

    iterates: np.ndarray  # (n_steps + 1, d)
    fitness: np.ndarray  # (n_steps + 1,)
    grad_norm: np.ndarray  # (n_steps,)
    alpha: np.ndarray  # (n_steps,)
    sigma: np.ndarray  # (n_steps,)
    degenerate: np.ndarray  # (n_steps,) bool
    best_fitness: float = field(init=False)
    best_solution: np.ndarray = field(init=False)
    iterations_to_best: int = field(init=False)

    def __post_init__(self):
        best = int(np.argmax(self.fitness))  # first index attaining the max
        self.best_fitness = float(self.fitness[best])
        self.best_solution = self.iterates[best].copy()
        self.iterations_to_best = best


class _TraceRecorder:
    def __init__(self, mu0, f0):
        self.mus = [np.array(mu0, dtype=float)]
        self.fitness = [float(f0)]
        self.grad_norm = []
        self.alpha = []
        self.sigma = []
        self.degenerate = []

    def step(self, mu, f, grad_norm, alpha, sigma, degenerate):
        self.mus.append(np.array(mu, dtype=float))
        self.fitness.append(float(f))
        self.grad_norm.append(float(grad_norm))
        self.alpha.append(float(alpha))
        self.sigma.append(float(sigma))
        self.degenerate.append(bool(degenerate))

    def finish(self) -> RunTrace:
        return RunTrace(
            iterates=np.asarray(self.mus),
            fitness=np.asarray(self.fitness),
            grad_norm=np.asarray(self.grad_norm),
            alpha=np.asarray(self.alpha),
            sigma=np.asarray(self.sigma),
            degenerate=np.asarray(self.degenerate, dtype=bool),
        )


def run_gspto(objective: ObjectiveSpec, config: OptimizerConfig) -> RunTrace:
    """Power-transformed Gaussian-smoothing ascent (pure power or exponential).

    Each non-degenerate update moves by exactly alpha_t along the normalized
    estimate (set ``normalize_updates=False`` for the raw-step variant the
    convergence analysis studies). Transform errors abort the run with the
    iteration index attached; degenerate estimates skip the step and are
    logged.
    """
    if config.algorithm not in GSPTO_ALGORITHMS:
        raise InvalidParameterError(f"run_gspto got algorithm {config.algorithm!r}")
    gen = RngStream(config.seed, config.stream).generator()
    mu = config.init.draw(gen, objective.dimension)
    recorder = None
    for t in range(config.updates):
        try:
            est = gspto_gradient(objective, mu, config.sigma, config.mode, config.samples, gen)
        except (NegativeFitnessError, AnchorError) as exc:
            raise RunAbortedError(t, exc) from exc
        if recorder is None:
            recorder = _TraceRecorder(mu, est.anchor_fitness)
        alpha = schedule_value(config.schedule, t)
        if est.degenerate:
            log.debug("degenerate estimate at iteration %d; holding position", t)
        elif config.normalize_updates:
            mu = mu + alpha * (est.vector / est.norm)
        else:
            mu = mu + alpha * est.vector
        recorder.step(mu, objective.eval(mu), est.norm, alpha, config.sigma, est.degenerate)
    if recorder is None:  # pragma: no cover - updates >= 1 is enforced
        recorder = _TraceRecorder(mu, objective.eval(mu))
    return recorder.finish()


def run_std_homotopy(objective: ObjectiveSpec, config: OptimizerConfig) -> RunTrace:
    """Double-loop homotopy: inner normalized sphere-smoothing ascent at fixed
    sigma, outer geometric sigma decay.

    The inner loop ends after ``inner_updates`` steps, when the best of the
    last tolerance+1 fitness values fails to beat the fitness tolerance steps
    back, or when the global budget runs out; the check is skipped while the
    inner loop is younger than the tolerance.
    """
    if config.algorithm != "std_homotopy":
        raise InvalidParameterError(f"run_std_homotopy got algorithm {config.algorithm!r}")
    hp = config.homotopy
    gen = RngStream(config.seed, config.stream).generator()
    mu = config.init.draw(gen, objective.dimension)
    f_mu = float(objective.eval(mu))
    recorder = _TraceRecorder(mu, f_mu)
    sigma = config.sigma
    t_global = 0
    n_sigma = 0
    while t_global < config.updates and n_sigma < hp.sigma_updates:
        improving = True
        t_inner = 0
        history = [f_mu]  # fitness along the current inner loop, f(mu_0) first
        while t_inner < hp.inner_updates and improving and t_global < config.updates:
            est = homotopy_gradient(objective, mu, sigma, config.samples, gen)
            alpha = schedule_value(config.schedule, t_global)
            if not est.degenerate:
                mu = mu + alpha * (est.vector / est.norm)
            f_mu = float(objective.eval(mu))
            recorder.step(mu, f_mu, est.norm, alpha, sigma, est.degenerate)
            history.append(f_mu)
            if t_inner >= hp.tolerance:
                window = history[t_inner - hp.tolerance + 1 : t_inner + 2]
                if max(window) <= history[t_inner - hp.tolerance]:
                    improving = False
            t_global += 1
            t_inner += 1
        sigma = hp.decay * sigma
        n_sigma += 1
    return recorder.finish()


def run_zo_sgd(objective: ObjectiveSpec, config: OptimizerConfig) -> RunTrace:
    """Forward-difference stochastic ascent; steps are not normalized."""
    if config.algorithm != "zo_sgd":
        raise InvalidParameterError(f"run_zo_sgd got algorithm {config.algorithm!r}")
    gen = RngStream(config.seed, config.stream).generator()
    mu = config.init.draw(gen, objective.dimension)
    recorder = None
    for t in range(config.updates):
        est = zo_sgd_gradient(objective, mu, config.sigma, config.samples, gen)
        if recorder is None:
            recorder = _TraceRecorder(mu, est.anchor_fitness)
        alpha = schedule_value(config.schedule, t)
        mu = mu + alpha * est.vector
        recorder.step(mu, objective.eval(mu), est.norm, alpha, config.sigma, False)
    if recorder is None:  # pragma: no cover
        recorder = _TraceRecorder(mu, objective.eval(mu))
    return recorder.finish()


def run(objective: ObjectiveSpec, config: OptimizerConfig) -> RunTrace:
    """Dispatch on ``config.algorithm``."""
    if config.algorithm in GSPTO_ALGORITHMS:
        return run_gspto(objective, config)
    if config.algorithm == "std_homotopy":
        return run_std_homotopy(objective, config)
    return run_zo_sgd(objective, config)
