"""Benchmark objectives, the attack loss, and the objective-evaluation contract.

Everything here is a maximization problem. An :class:`ObjectiveSpec` bundles a
scalar fitness function with its search domain: a coordinate box ``|x_i| <= M``
plus an optional tighter ``in_domain`` predicate. Samplers may step outside the
domain; the power transforms assign such points zero weight instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError

TWO_PI = 2.0 * math.pi

# Regularizers inside the two-log landscape; the first peak is far sharper
# than the second, which is what makes its maximum global.
TWO_LOG_EPS_GLOBAL = 1e-5
TWO_LOG_EPS_LOCAL = 1e-2


def _as_point(x, dimension=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError(f"expected a 1-D point, got shape {x.shape}")
    if dimension is not None and x.shape[0] != dimension:
        raise InvalidInputError(f"expected a point in R^{dimension}, got R^{x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"point contains non-finite entries: {x}")
    return x


def ackley(x) -> float:
    """Max-version Ackley on R^2. Global maximum 20 + e at the origin."""
    x = _as_point(x, 2)
    radial = math.sqrt(0.5 * (x[0] * x[0] + x[1] * x[1]))
    return 20.0 * math.exp(-0.2 * radial) + math.exp(
        0.5 * (math.cos(TWO_PI * x[0]) + math.cos(TWO_PI * x[1]))
    )


def rosenbrock(x) -> float:
    """Max-version Rosenbrock on R^2. Global maximum 0 at (1, 1)."""
    x = _as_point(x, 2)
    return -100.0 * (x[1] - x[0] * x[0]) ** 2 - (1.0 - x[0]) ** 2


def two_log(x, m1=None, m2=None) -> float:
    """Two-peak log landscape; the global maximum sits at ``m1``.

    Defaults put the global peak at (-0.5, ..., -0.5) and the local one at
    (0.5, ..., 0.5).
    """
    x = _as_point(x)
    d = x.shape[0]
    m1 = np.full(d, -0.5) if m1 is None else _as_point(m1, d)
    m2 = np.full(d, 0.5) if m2 is None else _as_point(m2, d)
    d1 = x - m1
    d2 = x - m2
    return -math.log(float(d1 @ d1) + TWO_LOG_EPS_GLOBAL) - math.log(
        float(d2 @ d2) + TWO_LOG_EPS_LOCAL
    )


def quadratic_bowl(x) -> float:
    """Concave quadratic -||x||^2 / 2; the oracle's closed-form family."""
    x = _as_point(x)
    return -0.5 * float(x @ x)


def _ackley_batch(X):
    radial = np.sqrt(0.5 * (X[:, 0] ** 2 + X[:, 1] ** 2))
    return 20.0 * np.exp(-0.2 * radial) + np.exp(
        0.5 * (np.cos(TWO_PI * X[:, 0]) + np.cos(TWO_PI * X[:, 1]))
    )


def _rosenbrock_batch(X):
    return -100.0 * (X[:, 1] - X[:, 0] ** 2) ** 2 - (1.0 - X[:, 0]) ** 2


def _two_log_batch(X, m1, m2):
    s1 = np.sum((X - m1) ** 2, axis=1)
    s2 = np.sum((X - m2) ** 2, axis=1)
    return -np.log(s1 + TWO_LOG_EPS_GLOBAL) - np.log(s2 + TWO_LOG_EPS_LOCAL)


def _quadratic_batch(X):
    return -0.5 * np.sum(X * X, axis=1)


@dataclass(frozen=True)
class BuiltinKernel:
    """Descriptor that lets the compiled backend evaluate an objective in C."""

    kind: str
    params: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass
class ObjectiveSpec:
    """A bounded-domain scalar objective over R^d.

    ``eval`` must be deterministic and already includes ``shift``. ``box`` is
    the half-width M of the coordinate box; ``in_domain`` may carve a smaller
    domain S out of that box (defaults to the box itself). Evaluation is
    stateless, so one spec may serve concurrent trials.
    """

    dimension: int
    eval: Callable[[np.ndarray], float]
    box: float
    name: str = "custom"
    in_domain: Optional[Callable[[np.ndarray], bool]] = None
    known_optimum: Optional[np.ndarray] = None
    known_max_value: Optional[float] = None
    shift: float = 0.0
    eval_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kernel: Optional[BuiltinKernel] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidInputError(f"dimension must be >= 1, got {self.dimension}")
        if not self.box > 0:
            raise InvalidInputError(f"domain box half-width must be > 0, got {self.box}")
        if self.known_optimum is not None:
            self.known_optimum = np.asarray(self.known_optimum, dtype=float)
            if not self.contains(self.known_optimum):
                raise InvalidInputError("known_optimum must satisfy in_domain")

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        inside_box = bool(np.all(np.abs(x) <= self.box))
        if self.in_domain is None:
            return inside_box
        return inside_box and bool(self.in_domain(x))

    def contains_batch(self, X) -> np.ndarray:
        inside = np.all(np.abs(X) <= self.box, axis=1)
        if self.in_domain is not None:
            custom = np.fromiter(
                (bool(self.in_domain(row)) for row in X), dtype=bool, count=X.shape[0]
            )
            inside &= custom
        return inside

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.eval_batch is not None:
            return np.asarray(self.eval_batch(X), dtype=float)
        return np.array([self.eval(row) for row in X], dtype=float)


def ackley_objective(box=10.0, shift=0.0) -> ObjectiveSpec:
    return ObjectiveSpec(
        dimension=2,
        eval=(lambda x: ackley(x) + shift) if shift else ackley,
        box=box,
        name="ackley",
        known_optimum=np.zeros(2),
        known_max_value=20.0 + math.e + shift,
        shift=shift,
        eval_batch=(lambda X: _ackley_batch(X) + shift) if shift else _ackley_batch,
        kernel=BuiltinKernel("ackley"),
    )


def rosenbrock_objective(box=10.0, shift=0.0, positive_domain=False) -> ObjectiveSpec:
    """Max-version Rosenbrock spec.

    ``positive_domain`` restricts S to the region where the shifted fitness is
    positive, which lets the pure power transform run without tripping its
    negative-fitness guard; samples outside S simply get zero weight.
    """
    in_domain = None
    kernel = BuiltinKernel("rosenbrock")
    if positive_domain:
        in_domain = lambda x: rosenbrock(x) + shift > 0.0  # noqa: E731
        kernel = None  # custom domain predicates take the generic path
    return ObjectiveSpec(
        dimension=2,
        eval=(lambda x: rosenbrock(x) + shift) if shift else rosenbrock,
        box=box,
        name="rosenbrock",
        known_optimum=np.array([1.0, 1.0]),
        known_max_value=0.0 + shift,
        shift=shift,
        eval_batch=(lambda X: _rosenbrock_batch(X) + shift) if shift else _rosenbrock_batch,
        in_domain=in_domain,
        kernel=kernel,
    )


def two_log_objective(dimension=2, box=2.0, shift=0.0, m1=None, m2=None) -> ObjectiveSpec:
    d = int(dimension)
    m1 = np.full(d, -0.5) if m1 is None else _as_point(m1, d)
    m2 = np.full(d, 0.5) if m2 is None else _as_point(m2, d)
    max_value = two_log(m1, m1, m2) + shift

    def _eval(x, _m1=m1, _m2=m2, _s=shift):
        return two_log(x, _m1, _m2) + _s

    def _eval_batch(X, _m1=m1, _m2=m2, _s=shift):
        return _two_log_batch(X, _m1, _m2) + _s

    return ObjectiveSpec(
        dimension=d,
        eval=_eval,
        box=box,
        name="two_log",
        known_optimum=m1.copy(),
        known_max_value=max_value,
        shift=shift,
        eval_batch=_eval_batch,
        kernel=BuiltinKernel("two_log", np.concatenate([m1, m2])),
    )


def quadratic_objective(dimension=1, box=12.0, shift=0.0) -> ObjectiveSpec:
    d = int(dimension)
    return ObjectiveSpec(
        dimension=d,
        eval=(lambda x: quadratic_bowl(x) + shift) if shift else quadratic_bowl,
        box=box,
        name="quadratic",
        known_optimum=np.zeros(d),
        known_max_value=0.0 + shift,
        shift=shift,
        eval_batch=(lambda X: _quadratic_batch(X) + shift) if shift else _quadratic_batch,
        kernel=BuiltinKernel("quadratic"),
    )


@dataclass(frozen=True)
class AttackLossParams:
    """Knobs of the targeted-attack loss.

    ``kappa`` sets the certainty margin the attack must clear and ``lam``
    weighs the perturbation-size penalty.
    """

    target_label: int
    kappa: float = 0.01
    lam: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidInputError(f"regularization weight must be >= 0, got {self.lam}")
        if not math.isfinite(self.kappa):
            raise InvalidInputError(f"kappa must be finite, got {self.kappa}")


def cw_attack_loss(perturbation, logits, params: AttackLossParams) -> float:
    """Margin-plus-norm attack loss; optimizers maximize its negation."""
    perturbation = _as_point(perturbation)
    logits = np.asarray(logits, dtype=float)
    if logits.ndim != 1 or logits.shape[0] < 2:
        raise InvalidInputError(f"need at least 2 logits, got shape {logits.shape}")
    t = params.target_label
    if not 0 <= t < logits.shape[0]:
        raise InvalidInputError(f"target label {t} out of range for {logits.shape[0]} classes")
    others = np.delete(logits, t)
    margin_term = max(float(np.max(others) - logits[t]), params.kappa)
    return margin_term + params.lam * float(np.linalg.norm(perturbation))


def attack_margin(logits, target_label) -> float:
    """Target logit minus best other logit; a perturbation wins when this exceeds kappa."""
    logits = np.asarray(logits, dtype=float)
    others = np.delete(logits, target_label)
    return float(logits[target_label] - np.max(others))


@dataclass(frozen=True)
class AffineLogitMap:
    """Synthetic black-box classifier: logits(x) = W (a + x) + b.

    Stands in for the image classifiers of the full-scale attack campaigns;
    ``image`` plays the role of the clean input being perturbed.
    """

    weights: np.ndarray  # (classes, dimension)
    bias: np.ndarray  # (classes,)
    image: np.ndarray  # (dimension,)

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    @property
    def classes(self) -> int:
        return self.weights.shape[0]

    def logits(self, perturbation) -> np.ndarray:
        return self.weights @ (self.image + np.asarray(perturbation, float)) + self.bias

    def logits_batch(self, X) -> np.ndarray:
        return (self.image + X) @ self.weights.T + self.bias

    def target_label(self) -> int:
        """The hardest target: class with the smallest clean logit."""
        return int(np.argmin(self.logits(np.zeros(self.dimension))))


def make_affine_instance(dimension, classes, rng, weight_scale=5.0) -> AffineLogitMap:
    if classes < 2:
        raise InvalidInputError(f"need at least 2 classes, got {classes}")
    W = weight_scale * rng.standard_normal((classes, dimension))
    b = rng.standard_normal(classes)
    a = rng.standard_normal(dimension)
    return AffineLogitMap(weights=W, bias=b, image=a)


def attack_objective(logit_map: AffineLogitMap, params: AttackLossParams) -> ObjectiveSpec:
    """Fitness = -loss over a logit source, ready for the optimizers."""

    def _eval(x):
        return -cw_attack_loss(x, logit_map.logits(x), params)

    def _eval_batch(X):
        logits = logit_map.logits_batch(X)
        target = logits[:, params.target_label]
        others = np.delete(logits, params.target_label, axis=1)
        margin_term = np.maximum(others.max(axis=1) - target, params.kappa)
        return -(margin_term + params.lam * np.linalg.norm(X, axis=1))

    return ObjectiveSpec(
        dimension=logit_map.dimension,
        eval=_eval,
        box=math.inf,
        name="attack",
        eval_batch=_eval_batch,
    )


_BUILDERS = {
    "ackley": ackley_objective,
    "rosenbrock": rosenbrock_objective,
    "two_log": two_log_objective,
    "quadratic": quadratic_objective,
}


def build_objective(name, **kwargs) -> ObjectiveSpec:
    """Construct a named benchmark objective; see ``_BUILDERS`` for the menu."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown objective {name!r}; available: {sorted(_BUILDERS)}"
        ) from None
    return builder(**kwargs)
