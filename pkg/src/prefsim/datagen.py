"""Preference-data generation and its sufficient statistics.

Choice sets are drawn from the base policy, a type is drawn from the type
distribution, and the choice is uniform within the type's category (uniform
over the whole set if that category is absent).  Under the two uniform-within-
category architectures every fitting loss depends on a record only through
``(n1, chosen)``, so a dataset compresses losslessly to counts over those
pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .choice import ChoiceSet, Message
from .core import BasePolicy, Category, TypeDistribution
from .errors import InvalidParameterError, UnsupportedFormatError

__all__ = [
    "GenerationConfig",
    "PreferenceDatum",
    "SufficientStats",
    "sample_choice_set",
    "sample_choice_set_members",
    "sample_dataset",
    "rho_stats",
    "partition_counts",
    "binomial_pmf",
]


@dataclass(frozen=True)
class GenerationConfig:
    """Everything needed to sample one preference dataset."""

    base: BasePolicy
    p_star: TypeDistribution
    set_size: int
    num_data: int

    def __post_init__(self) -> None:
        if self.set_size < 2:
            raise InvalidParameterError(f"set_size must be >= 2, got {self.set_size}")
        if self.num_data < 1:
            raise InvalidParameterError(f"num_data must be >= 1, got {self.num_data}")


@dataclass(frozen=True)
class PreferenceDatum:
    """One record: category counts of the alternatives and the chosen category."""

    n1: int
    n2: int
    chosen: Category

    def __post_init__(self) -> None:
        if self.n1 < 0 or self.n2 < 0 or self.n1 + self.n2 < 1:
            raise InvalidParameterError("counts must be nonnegative with n1 + n2 >= 1")
        if (self.chosen == Category.ONE and self.n1 < 1) or (
            self.chosen == Category.TWO and self.n2 < 1
        ):
            raise InvalidParameterError("chosen category must be present in the set")


@dataclass(frozen=True)
class SufficientStats:
    """Counts of records by ``(n1, chosen)`` for a fixed set size."""

    counts: Mapping[tuple[int, int], int] = field(repr=False)
    num_data: int = 0
    set_size: int = 0

    def __post_init__(self) -> None:
        if self.set_size < 2:
            raise InvalidParameterError("set_size must be >= 2")
        total = 0
        for (n1, chosen), count in self.counts.items():
            if count < 1:
                raise InvalidParameterError("counts must be positive")
            if not 0 <= n1 <= self.set_size:
                raise InvalidParameterError(f"n1 out of range: {n1}")
            if chosen not in (1, 2):
                raise InvalidParameterError(f"chosen must be 1 or 2, got {chosen}")
            PreferenceDatum(n1, self.set_size - n1, Category(chosen))
            total += count
        if total != self.num_data:
            raise InvalidParameterError(
                f"counts sum to {total}, expected num_data={self.num_data}"
            )

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Aligned vectors (n1, n2, chosen, count) over the distinct keys."""
        keys = sorted(self.counts)
        n1 = np.array([k[0] for k in keys], dtype=float)
        chosen = np.array([k[1] for k in keys], dtype=int)
        count = np.array([self.counts[k] for k in keys], dtype=float)
        return n1, self.set_size - n1, chosen, count

    @classmethod
    def from_records(
        cls, records: Iterable[PreferenceDatum], set_size: int
    ) -> "SufficientStats":
        counts: dict[tuple[int, int], int] = {}
        total = 0
        for rec in records:
            if rec.n1 + rec.n2 != set_size:
                raise InvalidParameterError("all records must share the set size")
            key = (rec.n1, int(rec.chosen))
            counts[key] = counts.get(key, 0) + 1
            total += 1
        return cls(counts, total, set_size)

    def to_records(self) -> list[PreferenceDatum]:
        """Expand back to one datum per record (small datasets only)."""
        out = []
        for (n1, chosen), count in sorted(self.counts.items()):
            datum = PreferenceDatum(n1, self.set_size - n1, Category(chosen))
            out.extend([datum] * count)
        return out

    def to_text(self) -> str:
        """Line-oriented form: header ``set_size,num_data`` then ``n1,chosen,count``."""
        lines = [f"{self.set_size},{self.num_data}"]
        for (n1, chosen), count in sorted(self.counts.items()):
            lines.append(f"{n1},{chosen},{count}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SufficientStats":
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines:
            raise UnsupportedFormatError("empty stats text")
        try:
            set_size, num_data = (int(v) for v in lines[0].split(","))
            counts: dict[tuple[int, int], int] = {}
            for line in lines[1:]:
                n1, chosen, count = (int(v) for v in line.split(","))
                key = (n1, chosen)
                if key in counts:
                    raise UnsupportedFormatError(f"duplicate key {key}")
                counts[key] = count
        except ValueError as exc:
            raise UnsupportedFormatError(f"malformed stats line: {exc}") from None
        return cls(counts, num_data, set_size)


def binomial_pmf(k: int, p: float) -> np.ndarray:
    """Binomial(k, p) pmf over 0..k, from exact integer coefficients."""
    return np.array(
        [math.comb(k, n) * p**n * (1.0 - p) ** (k - n) for n in range(k + 1)]
    )


def sample_choice_set(
    base: BasePolicy, set_size: int, rng: np.random.Generator
) -> tuple[int, int]:
    """Category counts of one choice set: n1 ~ Binomial(set_size, mass1)."""
    if set_size < 2:
        raise InvalidParameterError(f"set_size must be >= 2, got {set_size}")
    n1 = int(rng.binomial(set_size, base.mass1))
    return n1, set_size - n1


def sample_choice_set_members(
    base: BasePolicy, set_size: int, rng: np.random.Generator
) -> ChoiceSet:
    """A fully materialized choice set, for diagnostics that need identities.

    Within a category, indices are drawn without replacement while the pool
    allows it; if a category holds fewer messages than the slots it must
    fill, indices repeat (distinct multiset positions).  Fitting never sees
    identities, so the distinction only matters to set-level diagnostics.
    """
    n1, n2 = sample_choice_set(base, set_size, rng)
    members: list[Message] = []
    for cat, need in ((Category.ONE, n1), (Category.TWO, n2)):
        pool_size = base.pool.size(cat)
        if need <= pool_size:
            ids = rng.choice(pool_size, size=need, replace=False)
        else:
            ids = rng.integers(0, pool_size, size=need)
        members.extend(Message(cat, int(i)) for i in ids)
    return ChoiceSet(tuple(members))


def sample_dataset(config: GenerationConfig, rng: np.random.Generator) -> SufficientStats:
    """Sample a dataset and return its sufficient statistics.

    The per-record law is: counts from the base policy, a type from p*, the
    choice uniform within the type's category (whole set if absent), so the
    chosen category is 1 with probability 1, p*(1), or 0 according to whether
    the set is all category 1, mixed, or all category 2.  The statistics are
    drawn jointly from that law (a multinomial over n1, then binomial choice
    splits), which costs O(set_size) instead of O(num_data).
    """
    k = config.set_size
    pmf = binomial_pmf(k, config.base.mass1)
    per_n1 = rng.multinomial(config.num_data, pmf / pmf.sum())
    counts: dict[tuple[int, int], int] = {}
    for n1, total in enumerate(per_n1):
        total = int(total)
        if total == 0:
            continue
        if n1 == k:
            chose1 = total
        elif n1 == 0:
            chose1 = 0
        else:
            chose1 = int(rng.binomial(total, config.p_star.p1))
        if chose1 > 0:
            counts[(n1, 1)] = chose1
        if total - chose1 > 0:
            counts[(n1, 2)] = total - chose1
    return SufficientStats(counts, config.num_data, k)


def rho_stats(stats: SufficientStats) -> tuple[float, float]:
    """(rho_chosen, rho_data): fraction chosen in category 1, and mean n1/|Y|."""
    if stats.num_data < 1:
        raise InvalidParameterError("num_data must be >= 1")
    n1, _, chosen, count = stats.arrays
    rho_chosen = float(count[chosen == 1].sum()) / stats.num_data
    rho_data = float(np.dot(count, n1 / stats.set_size)) / stats.num_data
    return rho_chosen, rho_data


def partition_counts(stats: SufficientStats) -> tuple[int, int, int]:
    """(|I|, |I1|, |I2|): mixed-set records, split by chosen category."""
    n1, n2, chosen, count = stats.arrays
    mixed = (n1 >= 1) & (n2 >= 1)
    size_i1 = int(count[mixed & (chosen == 1)].sum())
    size_i2 = int(count[mixed & (chosen == 2)].sum())
    return size_i1 + size_i2, size_i1, size_i2
