"""Deterministic quadrature ground truth for 1-D and 2-D cases.

Computes the Gaussian-smoothed transformed objective

    F(mu) = (sqrt(2*pi) * sigma)^-d * integral f_N(x) exp(-|x - mu|^2 / (2 sigma^2)) dx

and its mu-gradient in the package's estimator convention, i.e. the gradient
integrand carries the factor (x - mu) with no 1/sigma^2 (so the quadrature
gradient equals sigma^2 times the derivative of F). Every evaluation is
refined by doubling the node count; non-convergent refinements raise.

Tensor-product quadrature keeps this honest only for d <= 2; higher dimensions
are cross-checked by Monte Carlo elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    AssumptionViolationError,
    ConfigError,
    InvalidParameterError,
    NegativeFitnessError,
    QuadratureError,
)
from .objectives import ObjectiveSpec
from .transforms import PGS, TransformMode, transform

_MAX_FLOAT = np.finfo(float).max

# Keep per-chunk scratch arrays around 20 MB.
_CHUNK_DOUBLES = 2_500_000


@dataclass(frozen=True)
class QuadratureGrid:
    """Integration region and rule.

    ``lo``/``hi`` bound the region per dimension; ``nodes`` is the per-dim
    node count (odd, >= 3 for the composite Simpson rule). ``rtol`` is the
    acceptance threshold for the node-doubling refinement check.
    """

    lo: np.ndarray
    hi: np.ndarray
    nodes: int = 2001
    rule: str = "simpson"
    rtol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, dtype=float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, dtype=float)))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise InvalidParameterError("grid lo/hi must be 1-D arrays of equal length")
        if not np.all(self.lo < self.hi):
            raise InvalidParameterError("grid needs lo < hi in every dimension")
        if self.rule not in ("simpson", "gauss"):
            raise InvalidParameterError(f"rule must be 'simpson' or 'gauss', got {self.rule!r}")
        if self.rule == "simpson" and (self.nodes < 3 or self.nodes % 2 == 0):
            raise InvalidParameterError("composite Simpson needs an odd node count >= 3")
        if self.rule == "gauss" and self.nodes < 2:
            raise InvalidParameterError("Gauss-Legendre needs at least 2 nodes")

    @property
    def dimension(self) -> int:
        return self.lo.shape[0]


def grid_for(objective: ObjectiveSpec, sigma, nodes=2001, rule="simpson", rtol=1e-8) -> QuadratureGrid:
    """Default region: the domain box widened by 8 sigma per side.

    The integrand vanishes outside the domain, so the margin only buys
    insurance against callers whose domain predicate reaches the box edge.
    """
    d = objective.dimension
    if d > 2:
        raise InvalidParameterError(f"quadrature oracle covers d <= 2, got d={d}")
    extent = objective.box + 8.0 * sigma
    return QuadratureGrid(
        lo=np.full(d, -extent), hi=np.full(d, extent), nodes=nodes, rule=rule, rtol=rtol
    )


def _nodes_weights_1d(lo, hi, n, rule):
    if rule == "simpson":
        x = np.linspace(lo, hi, n)
        h = (hi - lo) / (n - 1)
        w = np.full(n, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return x, w * (h / 3.0)
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1.0), half * w


def _tensor_points(grid: QuadratureGrid, refine: bool):
    n = grid.nodes
    if refine:
        n = 2 * n - 1 if grid.rule == "simpson" else 2 * n
    axes = [_nodes_weights_1d(grid.lo[j], grid.hi[j], n, grid.rule) for j in range(grid.dimension)]
    if grid.dimension == 1:
        x, w = axes[0]
        return x[:, None], w
    xs = np.meshgrid(*(a[0] for a in axes), indexing="ij")
    X = np.stack([g.ravel() for g in xs], axis=1)
    w = np.multiply.outer(axes[0][1], axes[1][1]).ravel()
    return X, w


def _transformed_values(objective: ObjectiveSpec, mode: TransformMode, X):
    """f_N on the node set: transformed inside the domain, exactly 0 outside."""
    fs = objective.evaluate_batch(X)
    inside = objective.contains_batch(X)
    if mode.kind == PGS:
        bad = inside & (fs < 0.0)
        if np.any(bad):
            raise NegativeFitnessError(float(fs[bad][0]))
        with np.errstate(over="ignore"):
            values = np.where(inside, np.maximum(fs, 0.0) ** mode.power, 0.0)
    else:
        with np.errstate(over="ignore", under="ignore"):
            values = np.where(inside, np.exp(mode.power * fs), 0.0)
    values[~np.isfinite(values)] = _MAX_FLOAT
    return values


def _smoothed_batch(objective, mus, sigma, mode, grid, want_grad, refine):
    X, w = _tensor_points(grid, refine)
    fn = _transformed_values(objective, mode, X)
    wf = w * fn
    d = grid.dimension
    prefactor = (math.sqrt(2.0 * math.pi) * sigma) ** (-d)
    n_mu = mus.shape[0]
    out = np.empty((n_mu, d) if want_grad else n_mu)
    chunk = max(1, _CHUNK_DOUBLES // X.shape[0])
    inv = 1.0 / (2.0 * sigma * sigma)
    for start in range(0, n_mu, chunk):
        stop = min(start + chunk, n_mu)
        sq = np.zeros((stop - start, X.shape[0]))
        for j in range(d):
            sq += (X[:, j][None, :] - mus[start:stop, j][:, None]) ** 2
        kernel = np.exp(-inv * sq)
        if want_grad:
            for j in range(d):
                diff = X[:, j][None, :] - mus[start:stop, j][:, None]
                out[start:stop, j] = prefactor * ((kernel * diff) @ wf)
        else:
            out[start:stop] = prefactor * (kernel @ wf)
    return out


def _refined_batch(objective, mus, sigma, mode, grid, want_grad):
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    if mus.shape[1] != grid.dimension or grid.dimension != objective.dimension:
        raise InvalidParameterError("mu, grid, and objective dimensions disagree")
    coarse = _smoothed_batch(objective, mus, sigma, mode, grid, want_grad, refine=False)
    fine = _smoothed_batch(objective, mus, sigma, mode, grid, want_grad, refine=True)
    rel = np.abs(coarse - fine) / (1.0 + np.abs(fine))
    worst = int(np.argmax(rel))
    if rel.flat[worst] > grid.rtol:
        raise QuadratureError(coarse.flat[worst], fine.flat[worst], grid.rtol)
    return fine


def quadrature_F(objective: ObjectiveSpec, mu, sigma, mode: TransformMode,
                 grid: Optional[QuadratureGrid] = None) -> float:
    """Gaussian-smoothed transformed objective at one point."""
    grid = grid or grid_for(objective, sigma)
    return float(_refined_batch(objective, np.atleast_2d(mu), sigma, mode, grid, False)[0])


def quadrature_grad_F(objective: ObjectiveSpec, mu, sigma, mode: TransformMode,
                      grid: Optional[QuadratureGrid] = None) -> np.ndarray:
    """Smoothed gradient in the estimator convention (integrand factor x - mu)."""
    grid = grid or grid_for(objective, sigma)
    return _refined_batch(objective, np.atleast_2d(mu), sigma, mode, grid, True)[0]


def quadrature_F_batch(objective, mus, sigma, mode, grid=None) -> np.ndarray:
    """F at many points; one shared refinement check over the whole batch."""
    grid = grid or grid_for(objective, sigma)
    return _refined_batch(objective, mus, sigma, mode, grid, False)


def quadrature_grad_F_batch(objective, mus, sigma, mode, grid=None) -> np.ndarray:
    grid = grid or grid_for(objective, sigma)
    return _refined_batch(objective, mus, sigma, mode, grid, True)


def _scan_points(lo, hi, step, dimension):
    axes = [np.arange(lo[j], hi[j] + 0.5 * step, step) for j in range(dimension)]
    if any(a.size == 0 for a in axes):
        raise InvalidParameterError("empty scan box")
    if dimension == 1:
        return axes[0][:, None]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def argmax_F_scan(objective: ObjectiveSpec, sigma, mode: TransformMode,
                  grid: Optional[QuadratureGrid], scan_lo, scan_hi, step) -> np.ndarray:
    """Grid-scan maximizer of F over the scan box.

    Ties break toward the lowest lexicographic coordinate (first maximum in
    row-major scan order).
    """
    scan_lo = np.atleast_1d(np.asarray(scan_lo, dtype=float))
    scan_hi = np.atleast_1d(np.asarray(scan_hi, dtype=float))
    if not (step > 0 and np.all(scan_lo <= scan_hi)):
        raise InvalidParameterError("scan box needs lo <= hi and step > 0")
    mus = _scan_points(scan_lo, scan_hi, step, objective.dimension)
    values = quadrature_F_batch(objective, mus, sigma, mode, grid)
    return mus[int(np.argmax(values))].copy()


@dataclass
class SignConditionReport:
    """Outcome of the componentwise gradient-sign sweep."""

    passed: bool
    violations: list  # (mu, coordinate, gradient value) triples
    points_checked: int
    conditions_checked: int


def check_sign_condition(objective: ObjectiveSpec, sigma, mode: TransformMode,
                         delta, bound_m, grid: Optional[QuadratureGrid] = None,
                         scan_points: int = 401) -> SignConditionReport:
    """Verify the localization sign pattern on a mu-grid over |mu_i| <= M.

    Outside the delta-band around the optimum, the smoothed gradient must
    point back toward it in every coordinate: positive below x*_i - delta,
    negative above x*_i + delta. Inside the band nothing is required.
    """
    if objective.known_optimum is None:
        raise ConfigError("sign check needs known_optimum on the objective")
    x_star = objective.known_optimum
    if np.any(np.abs(x_star) + delta > objective.box):
        raise InvalidParameterError("delta-box must sit inside the domain box")
    d = objective.dimension
    axes = [np.linspace(-bound_m, bound_m, scan_points) for _ in range(d)]
    if d == 1:
        mus = axes[0][:, None]
    else:
        grids = np.meshgrid(*axes, indexing="ij")
        mus = np.stack([g.ravel() for g in grids], axis=1)
    grads = quadrature_grad_F_batch(objective, mus, sigma, mode, grid)
    violations = []
    conditions = 0
    for mu, grad in zip(mus, grads):
        for i in range(d):
            if mu[i] < x_star[i] - delta:
                conditions += 1
                if not grad[i] > 0.0:
                    violations.append((mu.copy(), i, float(grad[i])))
            elif mu[i] > x_star[i] + delta:
                conditions += 1
                if not grad[i] < 0.0:
                    violations.append((mu.copy(), i, float(grad[i])))
    return SignConditionReport(
        passed=not violations,
        violations=violations,
        points_checked=mus.shape[0],
        conditions_checked=conditions,
    )


def _ball_mass(x_star, radius, sigma, centered, nodes=2001):
    """Integral of the localization kernel over the ball B(x*, radius).

    As written in the source analysis the kernel is exp(-|x|^2 / sigma^2),
    centered at the origin rather than at x*; ``centered=True`` switches to
    the (likely intended) exp(-|x - x*|^2 / sigma^2) variant.
    """
    d = x_star.shape[0]
    if d == 1:
        x, w = _nodes_weights_1d(x_star[0] - radius, x_star[0] + radius, nodes, "simpson")
        center = 0.0 if not centered else x_star[0]
        return float(w @ np.exp(-((x - center) ** 2) / (sigma * sigma)))
    n = 801  # masked tensor grid; the disk boundary limits accuracy anyway
    ax, aw = _nodes_weights_1d(x_star[0] - radius, x_star[0] + radius, n, "simpson")
    ay, bw = _nodes_weights_1d(x_star[1] - radius, x_star[1] + radius, n, "simpson")
    gx, gy = np.meshgrid(ax, ay, indexing="ij")
    mask = (gx - x_star[0]) ** 2 + (gy - x_star[1]) ** 2 <= radius * radius
    cx, cy = (x_star if centered else np.zeros(2))[:2]
    integrand = np.exp(-((gx - cx) ** 2 + (gy - cy) ** 2) / (sigma * sigma)) * mask
    return float(np.multiply.outer(aw, bw).ravel() @ integrand.ravel())


def estimate_threshold_N(objective: ObjectiveSpec, sigma, delta, bound_m,
                         scan_points: Optional[int] = None,
                         centered_kernel: bool = False) -> float:
    """Conservative transform power beyond which the sign condition holds.

    Exponential-mode analysis only. The ingredients: the off-peak supremum
    V_delta (grid scan of f outside the delta-ball), the midpoint level
    D_delta, the largest inner radius delta' on which f stays above D_delta,
    and the kernel ball mass V(delta', d, sigma). Returns
    max(0, ln(sqrt(pi/2) (delta - delta') e^{-M^2/sigma^2} V) / (V_delta - D_delta)).
    """
    if objective.known_optimum is None:
        raise ConfigError("threshold estimate needs known_optimum on the objective")
    x_star = objective.known_optimum
    f_star = float(objective.eval(x_star))
    d = objective.dimension
    if d > 2:
        raise InvalidParameterError("threshold estimate covers d <= 2 only")
    if scan_points is None:
        scan_points = 4001 if d == 1 else 301  # tensor scan; keep 2-D tractable
    points = _scan_points(np.full(d, -objective.box), np.full(d, objective.box),
                          2.0 * objective.box / (scan_points - 1), d)
    inside = objective.contains_batch(points)
    dist = np.linalg.norm(points - x_star, axis=1)
    spacing = 2.0 * objective.box / (scan_points - 1)

    far = inside & (dist >= delta)
    if not np.any(far):
        raise InvalidParameterError("delta-ball swallows the whole domain")
    v_delta = float(objective.evaluate_batch(points[far]).max())
    if v_delta >= f_star:
        raise AssumptionViolationError(
            f"no unique-maximum gap: sup off-peak fitness {v_delta} >= f(x*) {f_star}"
        )
    d_delta = 0.5 * (v_delta + f_star)

    near = dist < delta
    f_near = objective.evaluate_batch(points[near])
    low = f_near < d_delta
    if np.any(low):
        delta_prime = float(dist[near][low].min()) - spacing * math.sqrt(d)
    else:
        delta_prime = delta - spacing
    delta_prime = min(delta_prime, delta - spacing)
    if delta_prime <= 0:
        raise AssumptionViolationError(
            "fitness drops below the midpoint level immediately at the optimum; "
            "refine the scan or shrink delta"
        )

    ball = _ball_mass(x_star, delta_prime, sigma, centered_kernel)
    v_ball = (math.sqrt(2.0 * math.pi) ** (-d)) * sigma ** (-(d + 2)) * ball
    log_arg = (
        0.5 * math.log(math.pi / 2.0)
        + math.log(delta - delta_prime)
        - (bound_m * bound_m) / (sigma * sigma)
        + math.log(v_ball)
    )
    return max(0.0, log_arg / (v_delta - d_delta))


@dataclass(frozen=True)
class TheoryConstants:
    """Smoothness and variance constants of the convergence bound."""

    lipschitz: float  # L = transformed fitness at the optimum
    variance_bound: float  # G = d * sigma^2 * L^2
    threshold_power: Optional[float] = None


def theory_constants(objective: ObjectiveSpec, mode: TransformMode, sigma) -> TheoryConstants:
    if objective.known_max_value is None:
        raise ConfigError("theory constants need known_max_value on the objective")
    lipschitz = transform(objective.known_max_value, True, mode)
    variance = objective.dimension * sigma * sigma * lipschitz * lipschitz
    return TheoryConstants(lipschitz=lipschitz, variance_bound=variance)
