import math

import numpy as np
import pytest

from gspto import (
    AssumptionViolationError,
    ConfigError,
    InvalidParameterError,
    ObjectiveSpec,
    QuadratureError,
    QuadratureGrid,
    TransformMode,
    argmax_F_scan,
    check_sign_condition,
    estimate_threshold_N,
    grid_for,
    quadratic_objective,
    quadrature_F,
    quadrature_grad_F,
    theory_constants,
    two_log_objective,
)
from gspto.verify import gaussian_quadratic_F, gaussian_quadratic_grad_F

EPGS1 = TransformMode("epgs", 1.0)

# QUADPACK cross-checks of the 1-D two-log smoothed landscape (S = [-1, 1],
# sigma = 0.5, exponential transform with power 1, evaluated at mu = 0)
TWO_LOG_F_AT_0 = 493.70635525826646
TWO_LOG_GRAD_AT_0 = -230.31431453507622


def spiky_grid(nodes=200001, rtol=1e-8):
    return QuadratureGrid(lo=np.array([-1.0]), hi=np.array([1.0]), nodes=nodes, rtol=rtol)


class TestGridValidation:
    def test_simpson_needs_odd_nodes(self):
        with pytest.raises(InvalidParameterError):
            QuadratureGrid(lo=np.array([-1.0]), hi=np.array([1.0]), nodes=100)

    def test_lo_below_hi(self):
        with pytest.raises(InvalidParameterError):
            QuadratureGrid(lo=np.array([1.0]), hi=np.array([-1.0]))

    def test_unknown_rule(self):
        with pytest.raises(InvalidParameterError):
            QuadratureGrid(lo=np.array([0.0]), hi=np.array([1.0]), rule="trapezoid")

    def test_grid_for_extends_box_by_8_sigma(self):
        grid = grid_for(quadratic_objective(dimension=1, box=2.0), sigma=0.5)
        assert grid.lo[0] == -6.0 and grid.hi[0] == 6.0

    def test_grid_for_rejects_high_dimensions(self):
        with pytest.raises(InvalidParameterError):
            grid_for(quadratic_objective(dimension=3), 1.0)


class TestClosedFormFamily:
    def test_value_at_origin(self):
        obj = quadratic_objective(dimension=1)
        value = quadrature_F(obj, [0.0], 1.0, EPGS1)
        assert value == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)

    def test_value_off_origin(self):
        # exp(-1/4)/sqrt(2); mpmath and QUADPACK agree on this to 16 digits
        obj = quadratic_objective(dimension=1)
        value = quadrature_F(obj, [1.0], 1.0, EPGS1)
        assert value == pytest.approx(0.5506953149031838, abs=1e-9)

    def test_gradient_off_origin(self):
        obj = quadratic_objective(dimension=1)
        grad = quadrature_grad_F(obj, [1.0], 1.0, EPGS1)
        assert grad[0] == pytest.approx(-0.27534765745159187, abs=1e-9)

    def test_two_dimensional_product_form(self):
        obj = quadratic_objective(dimension=2)
        grid = grid_for(obj, 1.0, nodes=300, rule="gauss")
        mu = np.array([1.0, -0.5])
        value = quadrature_F(obj, mu, 1.0, EPGS1, grid)
        assert value == pytest.approx(gaussian_quadratic_F(mu, 1.0, 1.0), abs=1e-8)
        grad = quadrature_grad_F(obj, mu, 1.0, EPGS1, grid)
        np.testing.assert_allclose(grad, gaussian_quadratic_grad_F(mu, 1.0, 1.0), atol=1e-8)

    def test_gradient_matches_finite_difference_of_F(self):
        # the estimator-convention gradient is sigma^2 times dF/dmu
        obj = quadratic_objective(dimension=1)
        sigma, h = 0.8, 1e-4
        grid = grid_for(obj, sigma, nodes=400, rule="gauss")
        mu = 0.6
        grad = quadrature_grad_F(obj, [mu], sigma, EPGS1, grid)[0]
        diff = (quadrature_F(obj, [mu + h], sigma, EPGS1, grid)
                - quadrature_F(obj, [mu - h], sigma, EPGS1, grid)) / (2.0 * h)
        assert grad == pytest.approx(sigma * sigma * diff, abs=1e-6 * (1.0 + abs(grad)))


class TestQuadratureMechanics:
    def test_power_zero_gives_gaussian_mass(self):
        obj = quadratic_objective(dimension=1, box=2.0, shift=3.0)  # positive on the box
        value = quadrature_F(obj, [0.0], 0.25, TransformMode("pgs", 0.0))
        assert value == pytest.approx(1.0, abs=1e-10)

    def test_odd_integrand_vanishes(self):
        obj = quadratic_objective(dimension=1)
        grad = quadrature_grad_F(obj, [0.0], 1.0, EPGS1)
        assert abs(grad[0]) < 1e-8

    def test_two_log_against_quadpack(self):
        obj = two_log_objective(dimension=1, box=1.0)
        grid = spiky_grid()
        assert quadrature_F(obj, [0.0], 0.5, EPGS1, grid) == pytest.approx(
            TWO_LOG_F_AT_0, rel=1e-6
        )
        assert quadrature_grad_F(obj, [0.0], 0.5, EPGS1, grid)[0] == pytest.approx(
            TWO_LOG_GRAD_AT_0, rel=1e-6
        )

    def test_refinement_failure_raises_with_both_estimates(self):
        obj = two_log_objective(dimension=1, box=1.0)
        crude = spiky_grid(nodes=101)
        with pytest.raises(QuadratureError) as info:
            quadrature_F(obj, [0.0], 0.5, EPGS1, crude)
        err = info.value
        assert err.coarse != err.fine
        assert np.isfinite(err.coarse) and np.isfinite(err.fine)

    def test_node_doubling_self_consistency(self):
        # the shipped smoke grids change by < 1e-8 relative when doubled
        obj = quadratic_objective(dimension=1)
        for nodes in (2001, 4001):
            grid = grid_for(obj, 1.0, nodes=nodes)
            doubled = grid_for(obj, 1.0, nodes=2 * nodes - 1)
            a = quadrature_F(obj, [1.5], 1.0, EPGS1, grid)
            b = quadrature_F(obj, [1.5], 1.0, EPGS1, doubled)
            assert abs(a - b) / (1.0 + abs(b)) < 1e-8

    def test_gauss_and_simpson_agree(self):
        obj = quadratic_objective(dimension=1)
        simpson = quadrature_F(obj, [0.5], 1.0, EPGS1, grid_for(obj, 1.0, nodes=4001))
        gauss = quadrature_F(obj, [0.5], 1.0, EPGS1, grid_for(obj, 1.0, nodes=300, rule="gauss"))
        assert simpson == pytest.approx(gauss, abs=1e-9)


class TestArgmaxScan:
    def test_localization_ladder_monotone(self):
        obj = two_log_objective(dimension=1, box=1.0)
        grid = spiky_grid()
        distances = []
        for power in (1.0, 2.0, 4.0):
            mode = TransformMode("epgs", power)
            argmax = argmax_F_scan(obj, 0.5, mode, grid, [-1.0], [1.0], step=0.005)
            distances.append(abs(argmax[0] - (-0.5)))
        assert all(b <= a for a, b in zip(distances, distances[1:]))
        assert distances[-1] <= 0.1

    def test_symmetric_bimodal_small_power(self):
        def f(x):
            return -math.log((x[0] - 0.5) ** 2 + 1e-2) - math.log((x[0] + 0.5) ** 2 + 1e-2)

        obj = ObjectiveSpec(
            dimension=1, eval=f, box=1.0, name="sym",
            eval_batch=lambda X: -np.log((X[:, 0] - 0.5) ** 2 + 1e-2)
            - np.log((X[:, 0] + 0.5) ** 2 + 1e-2),
        )
        grid = QuadratureGrid(lo=np.array([-1.0]), hi=np.array([1.0]), nodes=20001)
        argmax = argmax_F_scan(obj, 1.0, TransformMode("epgs", 0.25), grid,
                               [-1.0], [1.0], step=0.01)
        assert abs(argmax[0]) <= 0.05

    def test_two_dimensional_scan(self):
        obj = quadratic_objective(dimension=2)
        grid = grid_for(obj, 1.0, nodes=200, rule="gauss")
        argmax = argmax_F_scan(obj, 1.0, EPGS1, grid, [-1.0, -1.0], [1.0, 1.0], step=0.25)
        np.testing.assert_array_equal(argmax, [0.0, 0.0])

    def test_empty_scan_box(self):
        obj = quadratic_objective(dimension=1)
        with pytest.raises(InvalidParameterError):
            argmax_F_scan(obj, 1.0, EPGS1, None, [1.0], [-1.0], step=0.1)


class TestSignCondition:
    def test_uniform_weights_violate(self):
        # power 0 flattens the landscape into plain Gaussian mass, whose
        # maximizer is the box center, not the optimum: violations expected
        obj = two_log_objective(dimension=1, box=1.0)
        grid = QuadratureGrid(lo=np.array([-1.0]), hi=np.array([1.0]), nodes=4001)
        report = check_sign_condition(obj, 0.5, TransformMode("epgs", 0.0), 0.1, 1.0,
                                      grid, scan_points=101)
        assert not report.passed
        assert report.violations

    def test_band_is_unconstrained(self):
        obj = two_log_objective(dimension=1, box=1.0)
        grid = QuadratureGrid(lo=np.array([-1.0]), hi=np.array([1.0]), nodes=4001)
        report = check_sign_condition(obj, 0.5, TransformMode("epgs", 0.0), 0.1, 1.0,
                                      grid, scan_points=101)
        mus = np.linspace(-1.0, 1.0, 101)
        in_band = np.sum((mus >= -0.6) & (mus <= -0.4))
        assert report.conditions_checked == 101 - in_band

    def test_quadratic_signs_clean(self):
        # wide box: the zero-outside-domain cutoff must be numerically invisible
        # or the spectral rule's refinement check (rightly) refuses
        obj = quadratic_objective(dimension=2)
        grid = grid_for(obj, 1.0, nodes=200, rule="gauss")
        report = check_sign_condition(obj, 1.0, EPGS1, 0.25, 2.0, grid, scan_points=21)
        assert report.passed
        assert report.points_checked == 21 * 21

    def test_delta_box_must_fit_in_domain(self):
        obj = two_log_objective(dimension=1, box=0.55)
        with pytest.raises(InvalidParameterError):
            check_sign_condition(obj, 0.5, EPGS1, 0.2, 0.5, spiky_grid())


class TestThresholdPower:
    def test_nonnegative_and_sufficient(self):
        obj = two_log_objective(dimension=1, box=1.0)
        power = estimate_threshold_N(obj, 0.5, 0.1, 1.0)
        assert power >= 0.0 and math.isfinite(power)
        report = check_sign_condition(obj, 0.5, TransformMode("epgs", power), 0.1, 1.0,
                                      spiky_grid(), scan_points=101)
        assert report.passed

    def test_growing_bound_never_shrinks_threshold(self):
        obj = two_log_objective(dimension=1, box=1.0)
        small = estimate_threshold_N(obj, 0.5, 0.1, 1.0)
        large = estimate_threshold_N(obj, 0.5, 0.1, 2.0)
        assert large >= small

    def test_two_dimensional_threshold(self):
        obj = two_log_objective(dimension=2, box=1.0)
        power = estimate_threshold_N(obj, 0.5, 0.2, 1.0)
        assert power >= 0.0 and math.isfinite(power)

    def test_no_gap_detected(self):
        obj = ObjectiveSpec(
            dimension=1, eval=lambda x: 5.0, box=1.0, name="flat",
            known_optimum=np.zeros(1), known_max_value=5.0,
            eval_batch=lambda X: np.full(X.shape[0], 5.0),
        )
        with pytest.raises(AssumptionViolationError):
            estimate_threshold_N(obj, 0.5, 0.1, 1.0)

    def test_centered_kernel_variant_differs(self):
        obj = two_log_objective(dimension=1, box=1.0)
        literal = estimate_threshold_N(obj, 0.5, 0.1, 1.0, centered_kernel=False)
        centered = estimate_threshold_N(obj, 0.5, 0.1, 1.0, centered_kernel=True)
        assert literal != centered
        # the literal origin-centered kernel underestimates the ball mass at
        # x* = -0.5, which makes its threshold the more conservative one
        assert literal >= centered


class TestTheoryConstants:
    def test_exponential_at_zero_max(self):
        obj = quadratic_objective(dimension=3)
        constants = theory_constants(obj, TransformMode("epgs", 7.0), sigma=0.5)
        assert constants.lipschitz == 1.0
        assert constants.variance_bound == pytest.approx(3 * 0.25)

    def test_power_arithmetic(self):
        obj = ObjectiveSpec(dimension=2, eval=lambda x: 2.0, box=1.0,
                            known_max_value=2.0, name="c2")
        constants = theory_constants(obj, TransformMode("pgs", 3.0), sigma=1.0)
        assert constants.lipschitz == 8.0
        assert constants.variance_bound == 128.0

    def test_scaling_in_dimension_and_sigma(self):
        mode = TransformMode("epgs", 1.0)
        g1 = theory_constants(quadratic_objective(dimension=1), mode, 1.0).variance_bound
        g2 = theory_constants(quadratic_objective(dimension=2), mode, 1.0).variance_bound
        g4 = theory_constants(quadratic_objective(dimension=1), mode, 2.0).variance_bound
        assert g2 == pytest.approx(2.0 * g1)
        assert g4 == pytest.approx(4.0 * g1)

    def test_missing_maximum_value(self):
        obj = ObjectiveSpec(dimension=1, eval=lambda x: 0.0, box=1.0, name="anon")
        with pytest.raises(ConfigError):
            theory_constants(obj, EPGS1, 1.0)
