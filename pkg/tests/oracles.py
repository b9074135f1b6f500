"""Independent reference implementations used as test oracles.

Everything here works record-by-record with plain ``math`` arithmetic, with
no log-space tricks and no reuse of the vectorized library paths, so an
agreement check between the two is meaningful.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from prefsim.core import BasePolicy, Category, PolicyParams, RewardParams
from prefsim.datagen import PreferenceDatum, SufficientStats


def make_stats(records: Sequence[tuple[int, int]], set_size: int) -> SufficientStats:
    """Build stats from (n1, chosen) pairs."""
    data = [PreferenceDatum(n1, set_size - n1, Category(ch)) for n1, ch in records]
    return SufficientStats.from_records(data, set_size)


def message_probs(theta: PolicyParams, base: BasePolicy) -> tuple[float, float]:
    """Per-message probability for each category, direct arithmetic."""
    s1, s2 = base.pool.size1, base.pool.size2
    w1, w2 = math.exp(theta.theta1), math.exp(theta.theta2)
    norm = s1 * w1 + s2 * w2
    return w1 / norm, w2 / norm


def brute_kl(theta: PolicyParams, base: BasePolicy) -> float:
    p1, p2 = message_probs(theta, base)
    s1, s2 = base.pool.size1, base.pool.size2
    total = 0.0
    for count, p, mass in ((s1, p1, base.mass1), (s2, p2, base.mass2)):
        base_per_message = mass / count
        total += count * p * math.log(p / base_per_message)
    return total


def brute_reward_loss(psi: RewardParams, records: Sequence[PreferenceDatum]) -> float:
    loss = 0.0
    for rec in records:
        denom = rec.n1 * math.exp(psi.psi1) + rec.n2 * math.exp(psi.psi2)
        loss += math.log(denom) - psi.value(rec.chosen)
    return loss


def brute_dpo_loss(
    theta: PolicyParams,
    records: Sequence[PreferenceDatum],
    base: BasePolicy,
    beta: float,
) -> float:
    p1, p2 = message_probs(theta, base)
    ratio1 = p1 / (base.mass1 / base.pool.size1)
    ratio2 = p2 / (base.mass2 / base.pool.size2)
    exponent = beta / len(records)
    w1, w2 = ratio1**exponent, ratio2**exponent
    loss = 0.0
    for rec in records:
        w_chosen = w1 if rec.chosen == Category.ONE else w2
        loss += math.log((rec.n1 * w1 + rec.n2 * w2) / w_chosen)
    return loss


def brute_il_loss(
    theta: PolicyParams,
    records: Sequence[PreferenceDatum],
    base: BasePolicy,
    beta: float,
) -> float:
    p1, p2 = message_probs(theta, base)
    loss = 0.0
    for rec in records:
        p_chosen = p1 if rec.chosen == Category.ONE else p2
        loss += math.log((rec.n1 * p1 + rec.n2 * p2) / p_chosen)
    return loss + beta * brute_kl(theta, base)


def brute_slic_loss(
    theta: PolicyParams,
    records: Sequence[PreferenceDatum],
    base: BasePolicy,
    beta: float,
    delta: float,
) -> float:
    p1, p2 = message_probs(theta, base)
    loss = 0.0
    for rec in records:
        if rec.chosen == Category.ONE:
            p_chosen, p_other = p1, p2 if rec.n2 == 1 else p1
        else:
            p_chosen, p_other = p2, p1 if rec.n1 == 1 else p2
        loss += max(0.0, math.log(p_other / p_chosen) + delta)
    return loss + beta * brute_kl(theta, base)


def binom_pmf_value(k: int, n: int, p: float) -> float:
    return math.comb(k, n) * p**n * (1.0 - p) ** (k - n)


def chosen_one_probability(k: int, mass1: float, p1: float) -> float:
    """Total probability the chosen category is 1, by enumeration over (n1, Z)."""
    total = 0.0
    for n in range(k + 1):
        if n == k:
            conditional = 1.0
        elif n == 0:
            conditional = 0.0
        else:
            conditional = p1
        total += binom_pmf_value(k, n, mass1) * conditional
    return total


def mixed_conditional_share(zeta: float, k: int) -> float:
    """E[n1/k | 1 <= n1 <= k-1] under Binomial(k, zeta), by direct summation."""
    numerator = sum((n / k) * binom_pmf_value(k, n, zeta) for n in range(1, k))
    denominator = sum(binom_pmf_value(k, n, zeta) for n in range(1, k))
    return numerator / denominator


def central_diff(fn: Callable[[float], float], x: float, h: float = 1e-6) -> float:
    return (fn(x + h) - fn(x - h)) / (2.0 * h)
