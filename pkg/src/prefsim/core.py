"""Message pools, category-structured policies, and their closed-form masses.

Everything downstream works with two disjoint message categories.  Policies
and reward models are uniform within a category, so distributions are fully
described by the probability mass they put on each category.  Messages are
never materialized individually: a pool of a billion category-2 messages is
just the integer ``size2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "Category",
    "MessagePool",
    "BasePolicy",
    "TypeDistribution",
    "RewardParams",
    "PolicyParams",
    "category_mass",
    "kl_to_base",
]


class Category(IntEnum):
    """Label of one of the two message categories."""

    ONE = 1
    TWO = 2

    @property
    def other(self) -> "Category":
        return Category.TWO if self is Category.ONE else Category.ONE


def _check_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidParameterError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class MessagePool:
    """Cardinalities of the two disjoint message categories."""

    size1: int
    size2: int

    def __post_init__(self) -> None:
        if self.size1 < 1 or self.size2 < 1:
            raise InvalidParameterError(
                f"pool sizes must be >= 1, got ({self.size1}, {self.size2})"
            )

    def size(self, category: Category) -> int:
        return self.size1 if category == Category.ONE else self.size2


@dataclass(frozen=True)
class BasePolicy:
    """Reference message distribution, uniform within each category.

    ``mass1`` is the total probability of category 1; each category-1 message
    has probability ``mass1 / size1`` and each category-2 message
    ``(1 - mass1) / size2``.
    """

    mass1: float
    pool: MessagePool

    def __post_init__(self) -> None:
        _check_finite("mass1", self.mass1)
        if not 0.0 < self.mass1 < 1.0:
            raise InvalidParameterError(f"mass1 must be in (0, 1), got {self.mass1}")

    @property
    def mass2(self) -> float:
        return 1.0 - self.mass1

    def mass(self, category: Category) -> float:
        return self.mass1 if category == Category.ONE else self.mass2

    def log_message_mass(self, category: Category) -> float:
        """Log-probability of one individual message of the given category."""
        return math.log(self.mass(category)) - math.log(self.pool.size(category))


@dataclass(frozen=True)
class TypeDistribution:
    """Distribution over the two individual types."""

    p1: float

    def __post_init__(self) -> None:
        _check_finite("p1", self.p1)
        if not 0.0 < self.p1 < 1.0:
            raise InvalidParameterError(f"p1 must be in (0, 1), got {self.p1}")

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    def prob(self, category: Category) -> float:
        return self.p1 if category == Category.ONE else self.p2


@dataclass(frozen=True)
class RewardParams:
    """Two-component reward vector: every category-z message scores ``psi_z``.

    Both preference losses are invariant under adding a constant to the pair,
    so only the gap ``psi2 - psi1`` is identified; ``canonical()`` fixes
    ``psi1 = 0``.
    """

    psi1: float
    psi2: float

    def __post_init__(self) -> None:
        _check_finite("psi", self.psi1, self.psi2)

    @property
    def gap(self) -> float:
        return self.psi2 - self.psi1

    def canonical(self) -> "RewardParams":
        return RewardParams(0.0, self.gap)

    def value(self, category: Category) -> float:
        return self.psi1 if category == Category.ONE else self.psi2


@dataclass(frozen=True)
class PolicyParams:
    """Two-component policy vector.

    A category-z message has probability
    ``exp(theta_z) / (size1 * exp(theta1) + size2 * exp(theta2))``, so the
    induced distribution is normalized over the pool by construction and
    depends only on the gap ``theta2 - theta1``.
    """

    theta1: float
    theta2: float

    def __post_init__(self) -> None:
        _check_finite("theta", self.theta1, self.theta2)

    @property
    def gap(self) -> float:
        return self.theta2 - self.theta1

    def canonical(self) -> "PolicyParams":
        return PolicyParams(0.0, self.gap)

    def value(self, category: Category) -> float:
        return self.theta1 if category == Category.ONE else self.theta2


def category_mass(theta: PolicyParams, pool: MessagePool) -> tuple[float, float]:
    """Total probability the policy assigns to each category.

    Computed in log space so extreme gaps saturate cleanly to 0/1 instead of
    overflowing; ``q2`` is returned as ``1 - q1`` so the pair sums to one
    exactly.
    """
    lw1 = math.log(pool.size1) + theta.theta1
    lw2 = math.log(pool.size2) + theta.theta2
    norm = np.logaddexp(lw1, lw2)
    q1 = float(np.exp(lw1 - norm))
    return q1, 1.0 - q1


def kl_to_base(theta: PolicyParams, base: BasePolicy) -> float:
    """KL divergence from the policy to the base policy.

    Both distributions are uniform within categories over the same pool, so
    the message-level KL collapses to the two-point category form
    ``q1 ln(q1/mass1) + q2 ln(q2/mass2)``.
    """
    q1, q2 = category_mass(theta, base.pool)
    total = 0.0
    for q, c in ((q1, base.mass1), (q2, base.mass2)):
        if q > 0.0:
            total += q * math.log(q / c)
    # Rounding can leave a tiny negative residue when the masses match.
    return max(total, 0.0)
