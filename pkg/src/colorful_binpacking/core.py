"""Exact data model for colorful bin packing games.

Sizes, loads and costs are :class:`fractions.Fraction` throughout. A bin is a
tuple of item ids ordered bottom to top; a profile always has exactly ``n``
bins, so unused bins appear as empty tuples.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

Bin = tuple[int, ...]
Cost = Union[Fraction, float]

INFINITE: float = math.inf


class StructureError(ValueError):
    """Raised for malformed items, bins or profiles."""


class CapExceeded(RuntimeError):
    """Raised when an exhaustive computation would exceed its configured cap."""


class CostModel(str, enum.Enum):
    EGALITARIAN = "egalitarian"
    PROPORTIONAL = "proportional"


@dataclass(frozen=True)
class Item:
    id: int
    size: Fraction
    color: int

    def __post_init__(self) -> None:
        size = Fraction(self.size)
        object.__setattr__(self, "size", size)
        if not 0 <= size <= 1:
            raise StructureError(f"item {self.id}: size {size} outside [0, 1]")
        if self.color < 1:
            raise StructureError(f"item {self.id}: color must be >= 1")


@dataclass(frozen=True)
class GameInstance:
    items: tuple[Item, ...]
    m: int
    cost_model: CostModel = CostModel.EGALITARIAN

    def __post_init__(self) -> None:
        items = tuple(sorted(self.items, key=lambda it: it.id))
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "cost_model", CostModel(self.cost_model))
        if self.m < 2:
            raise StructureError("a game needs at least two colors")
        ids = [it.id for it in items]
        if ids != list(range(1, len(items) + 1)):
            raise StructureError("item ids must be exactly 1..n")
        for it in items:
            if it.color > self.m:
                raise StructureError(f"item {it.id}: color {it.color} > m={self.m}")

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def bin_count(self) -> int:
        return len(self.items)

    def item(self, item_id: int) -> Item:
        if not 1 <= item_id <= len(self.items):
            raise StructureError(f"unknown item id {item_id}")
        return self.items[item_id - 1]

    def size(self, item_id: int) -> Fraction:
        return self.item(item_id).size

    def color(self, item_id: int) -> int:
        return self.item(item_id).color

    @property
    def is_uniform(self) -> bool:
        return len({it.size for it in self.items}) <= 1

    def with_cost_model(self, cost_model: CostModel | str) -> "GameInstance":
        return GameInstance(self.items, self.m, CostModel(cost_model))


def make_instance(
    specs: Iterable[tuple[Fraction | int | str, int]],
    m: int,
    cost_model: CostModel | str = CostModel.EGALITARIAN,
) -> GameInstance:
    """Build an instance from ``(size, color)`` pairs, numbering items 1..n."""
    items = tuple(
        Item(i, Fraction(size), color) for i, (size, color) in enumerate(specs, start=1)
    )
    return GameInstance(items, m, CostModel(cost_model))


@dataclass(frozen=True)
class UniformMeta:
    kappa: int

    @property
    def parity(self) -> str:
        return "even" if self.kappa % 2 == 0 else "odd"


def uniform_meta(instance: GameInstance) -> UniformMeta:
    """Return kappa = floor(1/s) for a uniform-size game with kappa > 1."""
    if not instance.is_uniform:
        raise StructureError("instance does not have uniform sizes")
    s = instance.items[0].size
    if s == 0:
        raise StructureError("uniform size 0 leaves kappa undefined")
    kappa = math.floor(1 / s)
    if kappa <= 1:
        raise StructureError(f"kappa={kappa}; only kappa > 1 is meaningful")
    return UniformMeta(kappa)


@dataclass(frozen=True)
class ColorCounts:
    """Per-color multiplicities of a candidate bin."""

    counts: Mapping[int, int]

    @classmethod
    def of(cls, colors: Iterable[int]) -> "ColorCounts":
        return cls(dict(Counter(colors)))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def dominant(self) -> Optional[int]:
        if not self.counts:
            return None
        # lowest color index among the most frequent
        return min(self.counts, key=lambda c: (-self.counts[c], c))

    @property
    def dominant_count(self) -> int:
        return max(self.counts.values(), default=0)


def orderable(counts: ColorCounts | Mapping[int, int]) -> bool:
    """True iff the colors can be sequenced with no two equal neighbours."""
    if not isinstance(counts, ColorCounts):
        counts = ColorCounts(dict(counts))
    return counts.dominant_count <= (counts.total + 1) // 2


def load(bin_: Sequence[int], instance: GameInstance) -> Fraction:
    return sum((instance.size(i) for i in bin_), Fraction(0))


def top_color(bin_: Sequence[int], instance: GameInstance) -> Optional[int]:
    return instance.color(bin_[-1]) if bin_ else None


def bin_is_feasible(bin_: Sequence[int], instance: GameInstance) -> bool:
    colors = [instance.color(i) for i in bin_]
    return all(a != b for a, b in zip(colors, colors[1:]))


def common_denominator(instance_or_items: GameInstance | Iterable[Item]) -> int:
    """Least common multiple of all size denominators."""
    items = (
        instance_or_items.items
        if isinstance(instance_or_items, GameInstance)
        else instance_or_items
    )
    return math.lcm(1, *(it.size.denominator for it in items))


@dataclass(frozen=True)
class Profile:
    """A strategy profile: ``n`` ordered bins over the items of ``instance``."""

    instance: GameInstance = field(repr=False)
    bins: tuple[Bin, ...]

    def __post_init__(self) -> None:
        bins = tuple(tuple(b) for b in self.bins)
        object.__setattr__(self, "bins", bins)
        inst = self.instance
        if len(bins) != inst.bin_count:
            raise StructureError(f"expected {inst.bin_count} bins, got {len(bins)}")
        seen = [i for b in bins for i in b]
        if sorted(seen) != list(range(1, inst.n + 1)):
            raise StructureError("every item must appear in exactly one bin")
        for j, b in enumerate(bins):
            if load(b, inst) > 1:
                raise StructureError(f"bin {j} exceeds capacity")

    @classmethod
    def from_bins(cls, instance: GameInstance, bins: Iterable[Sequence[int]]) -> "Profile":
        """Build a profile from the open bins, padding with empty bins."""
        bins = [tuple(b) for b in bins]
        bins += [()] * (instance.bin_count - len(bins))
        return cls(instance, tuple(bins))

    @classmethod
    def singletons(cls, instance: GameInstance) -> "Profile":
        return cls(instance, tuple((it.id,) for it in instance.items))

    @cached_property
    def loads(self) -> tuple[Fraction, ...]:
        return tuple(load(b, self.instance) for b in self.bins)

    @cached_property
    def location(self) -> dict[int, tuple[int, int]]:
        """Map item id to ``(bin index, 0-based position from the bottom)``."""
        return {i: (j, p) for j, b in enumerate(self.bins) for p, i in enumerate(b)}

    def bin_of(self, item_id: int) -> int:
        try:
            return self.location[item_id][0]
        except KeyError:
            raise StructureError(f"item {item_id} not in profile") from None

    @property
    def open_bins(self) -> list[int]:
        return [j for j, b in enumerate(self.bins) if b]

    def canonical_key(self) -> tuple[Bin, ...]:
        """Open bins sorted by (item count, sequence); identifies the profile up to renumbering."""
        return tuple(sorted((b for b in self.bins if b), key=lambda b: (len(b), b)))

    def canonical(self) -> "Profile":
        return Profile.from_bins(self.instance, self.canonical_key())


def is_misplaced(profile: Profile, item_id: int) -> bool:
    j, p = profile.location.get(item_id, (None, None))
    if j is None:
        raise StructureError(f"item {item_id} not in profile")
    bin_ = profile.bins[j]
    color = profile.instance.color(item_id)
    color_of = profile.instance.color
    return (p > 0 and color_of(bin_[p - 1]) == color) or (
        p + 1 < len(bin_) and color_of(bin_[p + 1]) == color
    )


def is_feasible(profile: Profile) -> bool:
    return all(bin_is_feasible(b, profile.instance) for b in profile.bins)


def share(size: Fraction, bin_size: int, bin_load: Fraction, model: CostModel) -> Fraction:
    """Cost share of a non-misplaced item in a bin with the given count and load."""
    if model is CostModel.EGALITARIAN or bin_load == 0:
        # all-zero bins fall back to the equal split
        return Fraction(1, bin_size)
    return size / bin_load


def player_cost(profile: Profile, item_id: int) -> Cost:
    if is_misplaced(profile, item_id):
        return INFINITE
    inst = profile.instance
    j = profile.bin_of(item_id)
    return share(inst.size(item_id), len(profile.bins[j]), profile.loads[j], inst.cost_model)


def social_cost(profile: Profile) -> int:
    return sum(1 for b in profile.bins if b)
