"""The four preference-fitting losses and their minimizers.

Under the two-category architectures every loss reduces to a function of one
scalar once the translation gauge is fixed (``psi1 = 0`` or ``theta1 = 0``),
and every fit below solves that scalar problem by sign bisection of the
analytic derivative.  Sign bisection is scale-invariant, which matters for
the direct-preference loss: its ``beta/|D|`` exponent makes the loss surface
numerically flat in value at large ``|D|`` while the derivative's sign stays
perfectly informative.

Minimizer nonexistence is a reported state, not an error: for the two
cross-entropy-style losses the minimizer exists exactly when the data contain
mixed-category sets with each category chosen at least once, and the fits
fall back to the zero parameter vector otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    BasePolicy,
    Category,
    PolicyParams,
    RewardParams,
    category_mass,
    kl_to_base,
)
from .datagen import SufficientStats, partition_counts
from .errors import InvalidParameterError, UnsupportedFormatError
from .solvers import bisect_rising_sign, bisect_root, expand_to_sign_change

__all__ = [
    "FitSettings",
    "FitResult",
    "reward_loss",
    "reward_loss_grad",
    "fit_reward",
    "policy_loss",
    "optimal_policy",
    "dpo_loss",
    "dpo_loss_grad",
    "fit_dpo",
    "il_loss",
    "il_loss_grad",
    "fit_il",
    "slic_loss",
    "slic_loss_right_grad",
    "fit_slic",
    "fit_rlpo",
]

# Gap bracket equivalent to exp(gap) in [1e-30, 1e30]; outside it the
# stationarity function provably keeps one sign for any finite dataset.
_GAP_LIMIT = math.log(1e30)

# Gap that saturates float64 category masses to exactly 0/1 in log space.
_ARGMAX_GAP = 1e3

_EXPAND_LIMIT = 1e3


@dataclass(frozen=True)
class FitSettings:
    """Hyperparameters and solver knobs shared by the fitting routines."""

    beta: float = 1.0
    delta: float = 1.0
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise InvalidParameterError("tol must be positive")
        if self.delta <= 0:
            raise InvalidParameterError("delta must be positive")
        if self.beta < 0:
            raise InvalidParameterError("beta must be nonnegative")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be >= 1")


@dataclass(frozen=True)
class FitResult:
    """Outcome of one fit.

    ``converged`` means the solver bracket shrank below ``tol``, which for
    these losses bounds the per-record gradient (or pins a subgradient sign
    change) at the returned point.  ``minimizer_exists=False`` means the loss
    has no minimizer on the data and ``params`` is the documented zero
    fallback.
    """

    params: Union[RewardParams, PolicyParams]
    loss_value: float
    converged: bool
    minimizer_exists: bool


def _log_counts(n: np.ndarray) -> np.ndarray:
    """log(n) elementwise with log(0) = -inf, warning-free."""
    out = np.full(n.shape, -np.inf)
    np.log(n, out=out, where=n > 0)
    return out


def _pair_logsumexp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.logaddexp(a, b)


# ---------------------------------------------------------------------------
# Reward learning
# ---------------------------------------------------------------------------


def reward_loss(psi: RewardParams, stats: SufficientStats) -> float:
    """Cross-entropy of the softmax-over-rewards choice rule on the data.

    Per record: ``-(psi_chosen - ln(n1 e^psi1 + n2 e^psi2))``, accumulated
    over distinct (n1, chosen) keys.  Translation-invariant in psi.
    """
    n1, n2, chosen, count = stats.arrays
    norm = _pair_logsumexp(_log_counts(n1) + psi.psi1, _log_counts(n2) + psi.psi2)
    psi_chosen = np.where(chosen == 1, psi.psi1, psi.psi2)
    return float(np.dot(count, norm - psi_chosen))


def reward_loss_grad(gap: float, stats: SufficientStats) -> float:
    """d reward_loss / d psi2 at psi = (0, gap)."""
    n1, n2, chosen, count = stats.arrays
    norm = _pair_logsumexp(_log_counts(n1), _log_counts(n2) + gap)
    w2 = np.exp(_log_counts(n2) + gap - norm)
    return float(np.dot(count, w2 - (chosen == 2)))


def fit_reward(stats: SufficientStats, settings: FitSettings) -> FitResult:
    """Minimize the reward cross-entropy over the gauge-fixed gap.

    The stationarity function is monotone in the gap and changes sign on the
    bracket exactly when both mixed-choice counts |I1|, |I2| are positive;
    otherwise the loss decreases monotonically toward an infinite gap and the
    fit reports nonexistence with the zero fallback.
    """
    _, size_i1, size_i2 = partition_counts(stats)
    if size_i1 == 0 or size_i2 == 0:
        psi = RewardParams(0.0, 0.0)
        return FitResult(psi, reward_loss(psi, stats), False, False)
    root, converged = bisect_root(
        lambda g: reward_loss_grad(g, stats),
        -_GAP_LIMIT,
        _GAP_LIMIT,
        tol=settings.tol,
        max_iter=settings.max_iter,
    )
    psi = RewardParams(0.0, root)
    return FitResult(psi, reward_loss(psi, stats), converged, True)


# ---------------------------------------------------------------------------
# Policy optimization given a reward model
# ---------------------------------------------------------------------------


def policy_loss(
    theta: PolicyParams,
    reward: RewardParams,
    base: BasePolicy,
    num_data: int,
    beta: float,
) -> float:
    """Negative expected reward (scaled by the dataset size) plus KL penalty."""
    if beta < 0:
        raise InvalidParameterError("beta must be nonnegative")
    q1, q2 = category_mass(theta, base.pool)
    expected = q1 * reward.psi1 + q2 * reward.psi2
    return -num_data * expected + beta * kl_to_base(theta, base)


def optimal_policy(
    reward: RewardParams, base: BasePolicy, num_data: int, beta: float
) -> PolicyParams:
    """Exact minimizer of the policy loss under the two-category architecture.

    For beta > 0 the optimum reweights each base message mass by
    ``exp(reward * num_data / beta)``; the architecture can represent that
    distribution, so the returned parameters are exact.  beta = 0 is the pure
    argmax: all mass on the higher-reward category, base policy on ties.
    """
    if beta < 0:
        raise InvalidParameterError("beta must be nonnegative")
    base_gap = _base_matching_gap(base)
    if beta == 0.0:
        if reward.gap > 0:
            return PolicyParams(0.0, _ARGMAX_GAP)
        if reward.gap < 0:
            return PolicyParams(0.0, -_ARGMAX_GAP)
        return PolicyParams(0.0, base_gap)
    return PolicyParams(0.0, base_gap + reward.gap * num_data / beta)


def fit_rlpo(
    stats: SufficientStats, base: BasePolicy, beta: float, settings: FitSettings
) -> FitResult:
    """Reward learning followed by policy optimization, as one fit.

    When the reward minimizer does not exist the reward parameters fall back
    to zero, so the returned policy matches the base distribution.
    """
    reward_fit = fit_reward(stats, settings)
    psi = reward_fit.params
    assert isinstance(psi, RewardParams)
    theta = optimal_policy(psi, base, stats.num_data, beta)
    loss = policy_loss(theta, psi, base, stats.num_data, beta)
    return FitResult(theta, loss, reward_fit.converged, reward_fit.minimizer_exists)


# ---------------------------------------------------------------------------
# Direct preference optimization
# ---------------------------------------------------------------------------


def _dpo_logits(
    theta: PolicyParams, base: BasePolicy, exponent: float
) -> tuple[float, float]:
    # Per-category logit of (policy mass / base mass)^exponent; the common
    # policy normalizer cancels in the within-record softmax, so it is omitted.
    l1 = exponent * (theta.theta1 - base.log_message_mass(Category.ONE))
    l2 = exponent * (theta.theta2 - base.log_message_mass(Category.TWO))
    return l1, l2


def dpo_loss(
    theta: PolicyParams, stats: SufficientStats, base: BasePolicy, beta: float
) -> float:
    """Cross-entropy of the policy/base probability ratios raised to beta/|D|."""
    if beta <= 0:
        raise InvalidParameterError("beta must be positive")
    l1, l2 = _dpo_logits(theta, base, beta / stats.num_data)
    n1, n2, chosen, count = stats.arrays
    norm = _pair_logsumexp(_log_counts(n1) + l1, _log_counts(n2) + l2)
    l_chosen = np.where(chosen == 1, l1, l2)
    return float(np.dot(count, norm - l_chosen))


def dpo_loss_grad(
    gap: float, stats: SufficientStats, base: BasePolicy, beta: float
) -> float:
    """d dpo_loss / d theta2 at theta = (0, gap)."""
    exponent = beta / stats.num_data
    l1, l2 = _dpo_logits(PolicyParams(0.0, gap), base, exponent)
    n1, n2, chosen, count = stats.arrays
    norm = _pair_logsumexp(_log_counts(n1) + l1, _log_counts(n2) + l2)
    w2 = np.exp(_log_counts(n2) + l2 - norm)
    return exponent * float(np.dot(count, w2 - (chosen == 2)))


def fit_dpo(
    stats: SufficientStats, base: BasePolicy, beta: float, settings: FitSettings
) -> FitResult:
    """Minimize the direct-preference loss over the gauge-fixed gap.

    The loss is the reward cross-entropy under the affine reparameterization
    ``psi_z = (beta/|D|)(theta_z - ln(base mass_z / pool size_z))``, so the
    minimizer exists under the same mixed-choice condition and the gap
    bracket is the reward bracket mapped through that reparameterization.
    """
    if beta <= 0:
        raise InvalidParameterError("beta must be positive")
    _, size_i1, size_i2 = partition_counts(stats)
    if size_i1 == 0 or size_i2 == 0:
        theta = PolicyParams(0.0, 0.0)
        return FitResult(theta, dpo_loss(theta, stats, base, beta), False, False)
    scale = stats.num_data / beta
    center = _base_matching_gap(base)
    root, converged = bisect_root(
        lambda g: dpo_loss_grad(g, stats, base, beta),
        center - _GAP_LIMIT * scale,
        center + _GAP_LIMIT * scale,
        tol=settings.tol * max(1.0, scale),
        max_iter=settings.max_iter,
    )
    theta = PolicyParams(0.0, root)
    return FitResult(theta, dpo_loss(theta, stats, base, beta), converged, True)


# ---------------------------------------------------------------------------
# Inclusive learning
# ---------------------------------------------------------------------------


def il_loss(
    theta: PolicyParams, stats: SufficientStats, base: BasePolicy, beta: float
) -> float:
    """Cross-entropy of within-set policy masses plus KL toward the base.

    The policy normalizer cancels inside each record's conditional, leaving
    ``-(theta_chosen - ln(n1 e^theta1 + n2 e^theta2))`` per record.
    """
    if beta < 0:
        raise InvalidParameterError("beta must be nonnegative")
    n1, n2, chosen, count = stats.arrays
    norm = _pair_logsumexp(_log_counts(n1) + theta.theta1, _log_counts(n2) + theta.theta2)
    theta_chosen = np.where(chosen == 1, theta.theta1, theta.theta2)
    data_term = float(np.dot(count, norm - theta_chosen))
    return data_term + beta * kl_to_base(theta, base)


def _kl_grad_gap(gap: float, base: BasePolicy) -> float:
    # d KL / d theta2 at theta = (0, gap), via q1 q2 (ln(q2/q1) - ln(c2/c1)).
    q1, q2 = category_mass(PolicyParams(0.0, gap), base.pool)
    log_ratio = gap + math.log(base.pool.size2) - math.log(base.pool.size1)
    return q1 * q2 * (log_ratio - math.log(base.mass2 / base.mass1))


def il_loss_grad(
    gap: float, stats: SufficientStats, base: BasePolicy, beta: float
) -> float:
    """d il_loss / d theta2 at theta = (0, gap)."""
    n1, n2, chosen, count = stats.arrays
    norm = _pair_logsumexp(_log_counts(n1), _log_counts(n2) + gap)
    w2 = np.exp(_log_counts(n2) + gap - norm)
    data = float(np.dot(count, w2 - (chosen == 2)))
    return data + beta * _kl_grad_gap(gap, base)


def _base_matching_gap(base: BasePolicy) -> float:
    """Gap whose induced distribution reproduces the base policy exactly."""
    return base.log_message_mass(Category.TWO) - base.log_message_mass(Category.ONE)


def fit_il(
    stats: SufficientStats, base: BasePolicy, beta: float, settings: FitSettings
) -> FitResult:
    """Minimize the inclusive loss over the gauge-fixed gap.

    For beta > 0 the KL term guarantees a stationary point at a moderate gap
    and the derivative bracket expands until it straddles it.  For beta = 0
    existence reduces to the same mixed-choice condition as the reward fit.
    """
    if beta < 0:
        raise InvalidParameterError("beta must be nonnegative")

    def grad(g: float) -> float:
        return il_loss_grad(g, stats, base, beta)

    if beta == 0:
        _, size_i1, size_i2 = partition_counts(stats)
        if size_i1 == 0 or size_i2 == 0:
            theta = PolicyParams(0.0, 0.0)
            return FitResult(theta, il_loss(theta, stats, base, beta), False, False)
        span = _GAP_LIMIT + math.log(stats.set_size)
        lo, hi = -span, span
    else:
        center = _base_matching_gap(base)
        limit = _EXPAND_LIMIT + abs(center)
        bracket = expand_to_sign_change(
            grad, center - 1.0, center + 1.0, limit_lo=-limit, limit_hi=limit
        )
        if bracket is None:
            theta = PolicyParams(0.0, 0.0)
            return FitResult(theta, il_loss(theta, stats, base, beta), False, False)
        lo, hi = bracket
    root, converged = bisect_root(
        grad, lo, hi, tol=settings.tol, max_iter=settings.max_iter
    )
    theta = PolicyParams(0.0, root)
    return FitResult(theta, il_loss(theta, stats, base, beta), converged, True)


# ---------------------------------------------------------------------------
# Sequence likelihood calibration
# ---------------------------------------------------------------------------


def _slic_check(stats: SufficientStats, beta: float, delta: float) -> None:
    if stats.set_size != 2:
        raise UnsupportedFormatError(
            f"the calibration loss is defined for pairs only, got set_size={stats.set_size}"
        )
    if delta <= 0:
        raise InvalidParameterError("delta must be positive")
    if beta < 0:
        raise InvalidParameterError("beta must be nonnegative")


def slic_loss(
    theta: PolicyParams,
    stats: SufficientStats,
    base: BasePolicy,
    beta: float,
    delta: float,
) -> float:
    """Hinge on the rejected/chosen log-mass ratio with margin, plus KL.

    For a mixed pair the per-message log ratio is just the parameter gap, so
    chosen-category-1 records contribute ``(gap + delta)+``, chosen-2 records
    ``(delta - gap)+``, and same-category pairs the constant ``delta``.
    """
    _slic_check(stats, beta, delta)
    gap = theta.gap
    n1, _, chosen, count = stats.arrays
    mixed = n1 == 1
    hinge_arg = np.where(mixed, np.where(chosen == 1, gap, -gap) + delta, delta)
    data = float(np.dot(count, np.maximum(hinge_arg, 0.0)))
    return data + beta * kl_to_base(theta, base)


def slic_loss_right_grad(
    gap: float,
    stats: SufficientStats,
    base: BasePolicy,
    beta: float,
    delta: float,
) -> float:
    """Right derivative of slic_loss w.r.t. theta2 at theta = (0, gap)."""
    _slic_check(stats, beta, delta)
    n1, _, chosen, count = stats.arrays
    mixed = n1 == 1
    i1 = float(count[mixed & (chosen == 1)].sum())
    i2 = float(count[mixed & (chosen == 2)].sum())
    data = i1 * (1.0 if gap >= -delta else 0.0) - i2 * (1.0 if gap < delta else 0.0)
    return data + beta * _kl_grad_gap(gap, base)


def fit_slic(
    stats: SufficientStats,
    base: BasePolicy,
    beta: float,
    delta: float,
    settings: FitSettings,
) -> FitResult:
    """Minimize the calibration loss over the gauge-fixed gap.

    Bisects the right derivative with the kink convention above, so flat
    regions resolve to their leftmost minimizing point.  With beta > 0 a
    minimizer always exists (the KL term turns the derivative positive for
    large gaps in either direction).
    """
    _slic_check(stats, beta, delta)
    if beta <= 0:
        raise InvalidParameterError("fit_slic requires beta > 0")

    def right_grad(g: float) -> float:
        return slic_loss_right_grad(g, stats, base, beta, delta)

    center = _base_matching_gap(base)
    half = delta + 1.0 + abs(center)
    limit = _EXPAND_LIMIT + half
    bracket = expand_to_sign_change(
        right_grad, -half, half, limit_lo=-limit, limit_hi=limit
    )
    if bracket is None:
        theta = PolicyParams(0.0, 0.0)
        return FitResult(theta, slic_loss(theta, stats, base, beta, delta), False, False)
    root, converged = bisect_rising_sign(
        right_grad, bracket[0], bracket[1], tol=settings.tol, max_iter=settings.max_iter
    )
    theta = PolicyParams(0.0, root)
    return FitResult(theta, slic_loss(theta, stats, base, beta, delta), converged, True)
