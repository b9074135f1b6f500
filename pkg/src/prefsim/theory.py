"""Closed-form failure predictions and the concentration events behind them.

The headline quantity is the threshold function
``F(zeta) = (zeta - zeta^k) / (1 - zeta^k - (1 - zeta)^k)``: the expected
category-1 share of a size-k choice set given that both categories appear.
When the majority type's mass falls below it, reward learning (and hence the
direct-preference route) provably drives the fitted policy onto the minority
category as the dataset grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .core import BasePolicy, TypeDistribution, MessagePool
from .datagen import SufficientStats, partition_counts, rho_stats
from .errors import InvalidParameterError

__all__ = [
    "Direction",
    "FailurePrediction",
    "f_threshold",
    "predict_rlpo_failure",
    "default_eta",
    "event_eta_holds",
    "event_il_holds",
    "both_categories_rate",
    "il_asymptotic_mass",
]

_BOUNDARY_TOL = 1e-12


class Direction(Enum):
    COLLAPSE_TO_M2 = "collapse_to_M2"
    PREFER_M1 = "prefer_M1"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class FailurePrediction:
    """Whether the majority-preference inversion is predicted for a set size."""

    threshold: float
    condition_holds: bool
    set_size: int
    direction: Direction


def f_threshold(zeta: float, k: int) -> float:
    """Expected category-1 share of a size-k set, conditional on it being mixed.

    Evaluated through expm1/log1p so the numerator and denominator stay
    accurate where the plain powers cancel catastrophically (zeta near 0
    or 1).
    """
    if not 0.0 < zeta < 1.0:
        raise InvalidParameterError(f"zeta must be in (0, 1), got {zeta}")
    if k < 2:
        raise InvalidParameterError(f"set size must be >= 2, got {k}")
    log_zeta = math.log1p(zeta - 1.0)
    log_comp = math.log1p(-zeta)
    numerator = -zeta * math.expm1((k - 1) * log_zeta)  # zeta - zeta^k
    denominator = -math.expm1(k * log_zeta) - math.exp(k * log_comp)
    return numerator / denominator


def predict_rlpo_failure(
    base: BasePolicy, p_star: TypeDistribution, set_size: int
) -> FailurePrediction:
    """Evaluate the inversion condition ``p*(1) < F(mass1)`` for one set size."""
    threshold = f_threshold(base.mass1, set_size)
    if abs(p_star.p1 - threshold) <= _BOUNDARY_TOL:
        return FailurePrediction(threshold, False, set_size, Direction.BOUNDARY)
    if p_star.p1 < threshold:
        return FailurePrediction(threshold, True, set_size, Direction.COLLAPSE_TO_M2)
    return FailurePrediction(threshold, False, set_size, Direction.PREFER_M1)


def both_categories_rate(base: BasePolicy, set_size: int) -> float:
    """Probability a sampled choice set contains both categories."""
    if set_size < 2:
        raise InvalidParameterError(f"set size must be >= 2, got {set_size}")
    return 1.0 - base.mass1**set_size - base.mass2**set_size


def default_eta(base: BasePolicy, p_star: TypeDistribution, set_size: int) -> float:
    """Margin for the concentration event, as the proof construction picks it.

    With s the mixed-set rate, gamma = 1 - s^2 and delta the slack of the
    inversion condition, eta = (1 - gamma) * delta / 4.  Only defined when
    the condition holds strictly (delta > 0).
    """
    delta = f_threshold(base.mass1, set_size) - p_star.p1
    if delta <= 0:
        raise InvalidParameterError(
            "eta is defined only when the failure condition holds strictly"
        )
    s = both_categories_rate(base, set_size)
    gamma = 1.0 - s * s
    return (1.0 - gamma) * delta / 4.0


def event_eta_holds(stats: SufficientStats, eta: float) -> bool:
    """Check {rho_data - rho_chosen > eta} and {rho_chosen > 0} on one dataset."""
    if eta <= 0:
        raise InvalidParameterError("eta must be positive")
    rho_chosen, rho_data = rho_stats(stats)
    return rho_data - rho_chosen > eta and rho_chosen > 0.0


def event_il_holds(stats: SufficientStats, beta: float, p_star: TypeDistribution) -> bool:
    """Check the inclusive-learning event: |I1| > 1 and |I2| above its floor."""
    if beta < 0:
        raise InvalidParameterError("beta must be nonnegative")
    _, size_i1, size_i2 = partition_counts(stats)
    floor = max(1.0 + beta, 2.0 * beta * math.log(p_star.p2 / p_star.p1))
    return size_i1 > 1 and size_i2 > floor


def il_asymptotic_mass(p_star: TypeDistribution, pool: MessagePool) -> float:
    """Large-data, small-regularization limit of the inclusive fit's P(M1).

    Valid in the pairwise mixed-set regime, where the fit matches per-message
    probabilities in the ratio p*(1) : p*(2); the category mass is then
    ``r*size1 / (r*size1 + size2)`` with ``r = p1/p2``.  An asymptotic
    prediction: finite |D| and beta only approach it.
    """
    r = p_star.p1 / p_star.p2
    return r * pool.size1 / (r * pool.size1 + pool.size2)
