import math

import numpy as np
import pytest

from gspto import (
    AttackLossParams,
    InvalidInputError,
    ObjectiveSpec,
    ackley,
    ackley_objective,
    attack_margin,
    attack_objective,
    build_objective,
    cw_attack_loss,
    make_affine_instance,
    quadratic_objective,
    rosenbrock,
    rosenbrock_objective,
    two_log,
    two_log_objective,
)

MAX_ACKLEY = 20.0 + math.e


class TestAckley:
    def test_global_maximum_value(self):
        assert ackley([0.0, 0.0]) == pytest.approx(MAX_ACKLEY, abs=1e-12)

    def test_off_origin_value(self):
        # frozen from a 30-digit mpmath evaluation of the formula
        assert ackley([1.0, 0.0]) == pytest.approx(20.080750736350743, abs=1e-12)

    def test_far_point_below_maximum(self):
        assert ackley([5.0, 5.0]) < MAX_ACKLEY

    def test_origin_dominates_random_points(self):
        rng = np.random.default_rng(0)
        points = rng.uniform(-5.0, 5.0, size=(10_000, 2))
        values = ackley_objective().evaluate_batch(points)
        assert np.all(values < MAX_ACKLEY)

    @pytest.mark.parametrize("bad", [[np.nan, 0.0], [np.inf, 1.0]])
    def test_non_finite_input(self, bad):
        with pytest.raises(InvalidInputError):
            ackley(bad)

    def test_wrong_dimension(self):
        with pytest.raises(InvalidInputError):
            ackley([1.0, 2.0, 3.0])


class TestRosenbrock:
    def test_examples(self):
        assert rosenbrock([1.0, 1.0]) == 0.0
        assert rosenbrock([0.0, 0.0]) == -1.0
        assert rosenbrock([-3.0, 2.0]) == -4916.0

    def test_nonpositive_with_unique_maximum(self):
        rng = np.random.default_rng(1)
        points = rng.uniform(-3.0, 3.0, size=(10_000, 2))
        values = rosenbrock_objective().evaluate_batch(points)
        assert np.all(values <= 0.0)
        near_max = values > -1e-12
        assert np.all(np.linalg.norm(points[near_max] - [1.0, 1.0], axis=1) < 1e-3)

    def test_non_finite_input(self):
        with pytest.raises(InvalidInputError):
            rosenbrock([np.nan, 0.0])


class TestTwoLog:
    def test_peak_values(self):
        # -log(1e-5) - log(2.01) and -log(2.00001) - log(1e-2)
        assert two_log([-0.5, -0.5]) == pytest.approx(10.814790742899244, abs=1e-12)
        assert two_log([0.5, 0.5]) == pytest.approx(3.912018005440646, abs=1e-12)

    def test_peak_ordering(self):
        rng = np.random.default_rng(2)
        m1, m2 = np.full(2, -0.5), np.full(2, 0.5)
        f_m1, f_m2 = two_log(m1), two_log(m2)
        assert f_m1 > f_m2
        drawn = 0
        while drawn < 200:
            x = rng.uniform(-4.0, 4.0, 2)
            if np.linalg.norm(x - m1) > 1.0 and np.linalg.norm(x - m2) > 1.0:
                assert f_m2 > two_log(x)
                drawn += 1

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            two_log([0.0, 0.0], m1=[0.0], m2=[1.0])

    def test_custom_centers(self):
        assert two_log([2.0], m1=[2.0], m2=[0.0]) == pytest.approx(
            -math.log(1e-5) - math.log(4.01), abs=1e-12
        )


@pytest.mark.parametrize("builder,kwargs", [
    (ackley_objective, {}),
    (rosenbrock_objective, {}),
    (two_log_objective, {"dimension": 3}),
    (quadratic_objective, {"dimension": 2}),
])
def test_shift_contract_exact(builder, kwargs):
    base = builder(**kwargs)
    shifted = builder(shift=7.25, **kwargs)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform(-2.0, 2.0, base.dimension)
        assert shifted.eval(x) == base.eval(x) + 7.25
    X = rng.uniform(-2.0, 2.0, (64, base.dimension))
    assert np.array_equal(shifted.evaluate_batch(X), base.evaluate_batch(X) + 7.25)
    assert shifted.known_max_value == base.known_max_value + 7.25


def test_eval_deterministic():
    obj = two_log_objective(dimension=4)
    x = np.array([0.1, -0.3, 0.7, 0.2])
    assert obj.eval(x) == obj.eval(x)


def test_batch_matches_scalar():
    rng = np.random.default_rng(4)
    for builder, kw in [(ackley_objective, {}), (rosenbrock_objective, {}),
                        (two_log_objective, {"dimension": 5}), (quadratic_objective, {"dimension": 3})]:
        obj = builder(**kw)
        X = rng.uniform(-2.0, 2.0, (32, obj.dimension))
        batch = obj.evaluate_batch(X)
        scalar = np.array([obj.eval(row) for row in X])
        np.testing.assert_allclose(batch, scalar, rtol=1e-14)


class TestObjectiveSpec:
    def test_known_optimum_must_be_in_domain(self):
        with pytest.raises(InvalidInputError):
            ObjectiveSpec(dimension=1, eval=lambda x: 0.0, box=1.0,
                          known_optimum=np.array([2.0]))

    def test_contains_and_custom_domain(self):
        obj = ObjectiveSpec(
            dimension=1, eval=lambda x: float(x[0]), box=2.0,
            in_domain=lambda x: x[0] >= 0.0,
        )
        assert obj.contains([1.0])
        assert not obj.contains([-1.0])  # inside the box, outside S
        assert not obj.contains([3.0])
        mask = obj.contains_batch(np.array([[1.0], [-1.0], [3.0]]))
        assert mask.tolist() == [True, False, False]

    def test_default_batch_falls_back_to_eval(self):
        obj = ObjectiveSpec(dimension=2, eval=lambda x: float(x[0] + x[1]), box=5.0)
        X = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(obj.evaluate_batch(X), [3.0, 7.0])

    def test_positive_domain_rosenbrock(self):
        obj = rosenbrock_objective(shift=20000.0, positive_domain=True)
        assert obj.contains([1.0, 1.0])
        assert not obj.contains([-5.0, 2.0])  # shifted fitness negative there
        assert obj.kernel is None  # custom domain forces the generic path


class TestAttackLoss:
    def test_margin_clamped_at_kappa(self):
        params = AttackLossParams(target_label=0, kappa=0.01, lam=1.0)
        assert cw_attack_loss(np.zeros(2), [0.0, 0.0], params) == pytest.approx(0.01)

    def test_margin_plus_norm(self):
        params = AttackLossParams(target_label=1, kappa=0.01, lam=1.0)
        assert cw_attack_loss([2.0], [5.0, 1.0], params) == pytest.approx(6.0)

    def test_zero_lambda_ignores_perturbation(self):
        params = AttackLossParams(target_label=0, kappa=0.1, lam=0.0)
        logits = [1.0, 3.0, -2.0]
        a = cw_attack_loss([10.0, -3.0], logits, params)
        b = cw_attack_loss([0.0, 0.0], logits, params)
        assert a == b

    def test_target_out_of_range(self):
        params = AttackLossParams(target_label=5, kappa=0.0, lam=1.0)
        with pytest.raises(InvalidInputError):
            cw_attack_loss([0.0], [1.0, 2.0], params)

    def test_needs_two_logits(self):
        params = AttackLossParams(target_label=0, kappa=0.0, lam=1.0)
        with pytest.raises(InvalidInputError):
            cw_attack_loss([0.0], [1.0], params)

    def test_negative_lambda_rejected(self):
        with pytest.raises(InvalidInputError):
            AttackLossParams(target_label=0, kappa=0.0, lam=-1.0)

    def test_non_finite_kappa_rejected(self):
        with pytest.raises(InvalidInputError):
            AttackLossParams(target_label=0, kappa=math.inf)


class TestAffineAttack:
    def test_target_is_smallest_clean_logit(self):
        rng = np.random.default_rng(5)
        inst = make_affine_instance(8, 4, rng)
        clean = inst.logits(np.zeros(8))
        assert inst.target_label() == int(np.argmin(clean))

    def test_objective_is_negated_loss(self):
        rng = np.random.default_rng(6)
        inst = make_affine_instance(6, 3, rng)
        params = AttackLossParams(inst.target_label(), kappa=0.01, lam=1.0)
        obj = attack_objective(inst, params)
        x = rng.standard_normal(6)
        expected = -cw_attack_loss(x, inst.logits(x), params)
        assert obj.eval(x) == pytest.approx(expected, rel=1e-12)
        batch = obj.evaluate_batch(x[None, :])
        assert batch[0] == pytest.approx(expected, rel=1e-12)

    def test_margin_sign(self):
        logits = np.array([1.0, 5.0, 2.0])
        assert attack_margin(logits, 1) == pytest.approx(3.0)
        assert attack_margin(logits, 0) == pytest.approx(-4.0)

    def test_needs_two_classes(self):
        with pytest.raises(InvalidInputError):
            make_affine_instance(4, 1, np.random.default_rng(0))


def test_build_objective_registry():
    assert build_objective("ackley").name == "ackley"
    assert build_objective("two_log", dimension=5).dimension == 5
    with pytest.raises(InvalidInputError):
        build_objective("nope")
