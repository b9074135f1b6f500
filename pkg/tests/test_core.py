"""Category-mass and KL computations, plus parameter validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefsim.core import (
    BasePolicy,
    Category,
    MessagePool,
    PolicyParams,
    RewardParams,
    TypeDistribution,
    category_mass,
    kl_to_base,
)
from prefsim.errors import InvalidParameterError

POOL = MessagePool(10, 100)
BASE = BasePolicy(0.8, POOL)

finite_theta = st.floats(min_value=-30, max_value=30, allow_nan=False)


class TestCategoryMass:
    def test_uniform_over_messages(self):
        q1, q2 = category_mass(PolicyParams(0.0, 0.0), POOL)
        assert q1 == pytest.approx(10 / 110, abs=1e-14)
        assert q1 + q2 == 1.0

    def test_symmetric_pool(self):
        q1, _ = category_mass(PolicyParams(0.0, 0.0), MessagePool(10, 10))
        assert q1 == pytest.approx(0.5, abs=1e-14)

    def test_reproduces_base_policy_masses(self):
        theta = PolicyParams(math.log(0.8 / 10), math.log(0.2 / 100))
        q1, _ = category_mass(theta, POOL)
        assert q1 == pytest.approx(0.8, abs=1e-12)

    @given(theta1=finite_theta, theta2=finite_theta, shift=finite_theta)
    @settings(max_examples=100, deadline=None)
    def test_shift_invariance(self, theta1, theta2, shift):
        q_a = category_mass(PolicyParams(theta1, theta2), POOL)
        q_b = category_mass(PolicyParams(theta1 + shift, theta2 + shift), POOL)
        assert q_a[0] == pytest.approx(q_b[0], abs=1e-12)

    def test_message_probabilities_sum_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            theta = PolicyParams(*rng.uniform(-20, 20, size=2))
            q1, q2 = category_mass(theta, POOL)
            # Uniform within category: per-message mass times pool size.
            total = POOL.size1 * (q1 / POOL.size1) + POOL.size2 * (q2 / POOL.size2)
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_extreme_gap_saturates(self):
        q1, q2 = category_mass(PolicyParams(0.0, 1e3), POOL)
        assert q1 == 0.0
        assert q2 == 1.0


class TestKLToBase:
    def test_zero_at_base_match(self):
        theta = PolicyParams(math.log(0.8 / 10), math.log(0.2 / 100))
        assert kl_to_base(theta, BASE) <= 1e-12

    def test_zero_for_matching_masses_symmetric(self):
        base = BasePolicy(0.5, MessagePool(3, 7))
        theta = PolicyParams(math.log(0.5 / 3), math.log(0.5 / 7))
        assert kl_to_base(theta, base) <= 1e-12

    def test_hand_computed_value(self):
        # q1 = 0.9 against base mass 0.8 on the (10, 100) pool.
        theta = PolicyParams(math.log(0.9 / 10), math.log(0.1 / 100))
        expected = 0.9 * math.log(0.9 / 0.8) + 0.1 * math.log(0.1 / 0.2)
        assert kl_to_base(theta, BASE) == pytest.approx(expected, abs=1e-12)

    @given(theta1=finite_theta, theta2=finite_theta)
    @settings(max_examples=100, deadline=None)
    def test_nonnegative(self, theta1, theta2):
        assert kl_to_base(PolicyParams(theta1, theta2), BASE) >= 0.0

    def test_positive_when_masses_differ(self):
        theta = PolicyParams(0.0, 0.0)  # q1 ~ 0.0909 vs mass1 = 0.8
        assert kl_to_base(theta, BASE) > 0.1


class TestValidation:
    @pytest.mark.parametrize("sizes", [(0, 5), (5, 0), (-1, 3)])
    def test_bad_pool(self, sizes):
        with pytest.raises(InvalidParameterError):
            MessagePool(*sizes)

    @pytest.mark.parametrize("mass", [0.0, 1.0, -0.2, 1.5, math.nan])
    def test_bad_base_mass(self, mass):
        with pytest.raises(InvalidParameterError):
            BasePolicy(mass, POOL)

    @pytest.mark.parametrize("p1", [0.0, 1.0, math.inf])
    def test_bad_type_distribution(self, p1):
        with pytest.raises(InvalidParameterError):
            TypeDistribution(p1)

    def test_nonfinite_params_rejected(self):
        with pytest.raises(InvalidParameterError):
            PolicyParams(0.0, math.inf)
        with pytest.raises(InvalidParameterError):
            RewardParams(math.nan, 0.0)

    def test_gap_and_canonical(self):
        psi = RewardParams(1.5, 2.5)
        assert psi.gap == pytest.approx(1.0)
        assert psi.canonical() == RewardParams(0.0, 1.0)
        assert Category.ONE.other is Category.TWO
        assert BASE.mass(Category.TWO) == pytest.approx(0.2)
