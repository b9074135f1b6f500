"""Choice models over finite alternative sets.

Four ways of turning a population of individuals into choice probabilities:
hard argmax mixtures, soft (per-type softmax) mixtures, the plain logit, and
the two-type dichotomy model.  Plus the ratio diagnostic that measures how
far a model strays from independence of irrelevant alternatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from .core import Category, TypeDistribution
from .errors import InvalidParameterError, UndefinedRatioError

__all__ = [
    "Message",
    "ChoiceSet",
    "FiniteChoiceModel",
    "ChoiceDistribution",
    "hard_choice_probs",
    "soft_choice_probs",
    "logit_choice_probs",
    "dichotomy_choice_probs",
    "sample_choice",
    "sample_soft_choice_gumbel",
    "iia_deviation",
]


class Message(NamedTuple):
    """A single message, identified by its category and an index within it."""

    category: Category
    index: int


@dataclass(frozen=True)
class ChoiceSet:
    """An ordered multiset of alternative messages presented to an individual."""

    members: tuple[Message, ...]

    def __post_init__(self) -> None:
        if len(self.members) < 1:
            raise InvalidParameterError("choice set must contain at least one message")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def n1(self) -> int:
        return sum(1 for m in self.members if m.category == Category.ONE)

    @property
    def n2(self) -> int:
        return len(self.members) - self.n1

    def index_of(self, message: Message) -> int:
        try:
            return self.members.index(message)
        except ValueError:
            raise InvalidParameterError(f"{message} is not in the choice set") from None


@dataclass(frozen=True)
class FiniteChoiceModel:
    """A population model: finitely many types, a type distribution, rewards.

    ``reward(message, type)`` must return a finite float for every member of
    the choice set it is evaluated on.
    """

    types: tuple[Any, ...]
    weights: tuple[float, ...]
    reward: Callable[[Message, Any], float]

    def __post_init__(self) -> None:
        if len(self.types) != len(self.weights) or not self.types:
            raise InvalidParameterError("types and weights must be nonempty and aligned")
        if any(w < 0 for w in self.weights):
            raise InvalidParameterError("type weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise InvalidParameterError("type weights must sum to 1")

    @classmethod
    def dichotomy(cls, p_star: TypeDistribution) -> "FiniteChoiceModel":
        """Two types; each rewards its own category 1 and the other 0."""

        def reward(message: Message, z: Category) -> float:
            return 1.0 if message.category == z else 0.0

        return cls((Category.ONE, Category.TWO), (p_star.p1, p_star.p2), reward)

    def reward_row(self, choice_set: ChoiceSet, z: Any) -> np.ndarray:
        row = np.array([self.reward(m, z) for m in choice_set.members], dtype=float)
        if not np.all(np.isfinite(row)):
            raise InvalidParameterError("rewards must be finite")
        return row


@dataclass(frozen=True)
class ChoiceDistribution:
    """Probability of each member of a choice set being chosen."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", arr)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidParameterError("probs must be a nonempty vector")
        if np.any(arr < 0):
            raise InvalidParameterError("probs must be nonnegative")
        if abs(float(arr.sum()) - 1.0) > 1e-10:
            raise InvalidParameterError("probs must sum to 1")

    def __len__(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i])


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    w = np.exp(shifted)
    return w / w.sum()


def hard_choice_probs(model: FiniteChoiceModel, choice_set: ChoiceSet) -> ChoiceDistribution:
    """Each type picks uniformly among its reward maximizers; mix over types.

    Ties are detected by exact equality: reward tables hold user-specified
    constants, not computed values, so no epsilon policy is needed.
    """
    probs = np.zeros(len(choice_set))
    for w, z in zip(model.weights, model.types):
        row = model.reward_row(choice_set, z)
        top = row == row.max()
        probs[top] += w / top.sum()
    return ChoiceDistribution(probs)


def soft_choice_probs(model: FiniteChoiceModel, choice_set: ChoiceSet) -> ChoiceDistribution:
    """Mixture over types of per-type softmax choice rules."""
    probs = np.zeros(len(choice_set))
    for w, z in zip(model.weights, model.types):
        probs += w * _softmax(model.reward_row(choice_set, z))
    return ChoiceDistribution(probs)


def logit_choice_probs(base_rewards: Sequence[float], choice_set: ChoiceSet) -> ChoiceDistribution:
    """Standard logit: softmax of one shared reward per alternative."""
    rewards = np.asarray(base_rewards, dtype=float)
    if rewards.shape != (len(choice_set),):
        raise InvalidParameterError("base_rewards must align with the choice set")
    if not np.all(np.isfinite(rewards)):
        raise InvalidParameterError("base_rewards must be finite")
    return ChoiceDistribution(_softmax(rewards))


def dichotomy_choice_probs(
    p_star: TypeDistribution, choice_set: ChoiceSet
) -> ChoiceDistribution:
    """Two-type model: a type picks uniformly within its category.

    When a type's preferred category is absent, every alternative ties at
    reward zero for that type, so its choice is uniform over the whole set.
    This matches ``hard_choice_probs`` applied to the dichotomy reward table.
    """
    n = len(choice_set)
    n1 = choice_set.n1
    n2 = n - n1
    probs = np.zeros(n)
    for p, cat, count in ((p_star.p1, Category.ONE, n1), (p_star.p2, Category.TWO, n2)):
        if count > 0:
            for i, m in enumerate(choice_set.members):
                if m.category == cat:
                    probs[i] += p / count
        else:
            probs += p / n
    return ChoiceDistribution(probs)


def sample_choice(distribution: ChoiceDistribution, rng: np.random.Generator) -> int:
    """Draw one member index; deterministic given the stream state."""
    return int(rng.choice(len(distribution), p=distribution.probs))


def sample_soft_choice_gumbel(
    model: FiniteChoiceModel,
    choice_set: ChoiceSet,
    rng: np.random.Generator,
    size: int = 1,
) -> np.ndarray:
    """Sample choices from a soft model through its hard-choice form.

    A type is drawn from the model weights, every member reward is perturbed
    by independent standard Gumbel noise, and the argmax is taken.  Gumbel
    variates come from the inverse CDF ``-ln(-ln U)`` so the draw is exact
    and fully determined by the uniform stream.
    """
    table = np.stack([model.reward_row(choice_set, z) for z in model.types])
    z_idx = rng.choice(len(model.types), size=size, p=model.weights)
    u = rng.random((size, len(choice_set)))
    gumbel = -np.log(-np.log(u))
    return np.argmax(table[z_idx] + gumbel, axis=1)


def iia_deviation(
    probs_fn: Callable[[ChoiceSet], ChoiceDistribution],
    x: Message,
    x_prime: Message,
    set_a: ChoiceSet,
    set_b: ChoiceSet,
) -> float:
    """Absolute log-distortion of the odds of ``x`` over ``x_prime`` across sets.

    Zero exactly when the probability ratio of the pair is the same in both
    sets, which is what independence of irrelevant alternatives demands.
    """
    pa = probs_fn(set_a)
    pb = probs_fn(set_b)
    values = (
        pa[set_a.index_of(x)],
        pa[set_a.index_of(x_prime)],
        pb[set_b.index_of(x)],
        pb[set_b.index_of(x_prime)],
    )
    if any(v == 0.0 for v in values):
        raise UndefinedRatioError("all four choice probabilities must be positive")
    ax, axp, bx, bxp = values
    return abs(math.log((ax / axp) / (bx / bxp)))
