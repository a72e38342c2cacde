"""Constructive equilibrium computation.

``algorithm1`` repeatedly opens the best single bin for the remaining items:
the largest feasible set (egalitarian) or the heaviest one (proportional).
``algorithm2`` is the colour-alternating greedy fill for uniform sizes.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import (
    Bin,
    CostModel,
    GameInstance,
    Item,
    Profile,
    StructureError,
    common_denominator,
    uniform_meta,
)


def _greedy_sequence(groups: dict[int, list[Item]], prev: Optional[int]) -> Optional[list[Item]]:
    seq: list[Item] = []
    remaining = sum(len(g) for g in groups.values())
    while remaining:
        candidates = [c for c, g in groups.items() if g and c != prev]
        if not candidates:
            return None
        color = min(candidates, key=lambda c: (-len(groups[c]), c))
        seq.append(groups[color].pop(0))
        prev = color
        remaining -= 1
    return seq


def order_bin(items: Iterable[Item], top_color: Optional[int] = None) -> Optional[Bin]:
    """Sequence ``items`` bottom to top so that no two neighbours share a colour.

    Greedy: always place a most frequent remaining colour different from the
    one just placed (ties to the lowest colour, then lowest id). With
    ``top_color`` the sequence is built downwards from an item of that colour.
    Returns ``None`` when no clash-free order exists.
    """
    items = list(items)
    if sum((it.size for it in items), Fraction(0)) > 1:
        raise StructureError("items exceed the bin capacity")
    groups: dict[int, list[Item]] = defaultdict(list)
    for it in sorted(items, key=lambda it: it.id):
        groups[it.color].append(it)
    if top_color is None:
        seq = _greedy_sequence(groups, None)
        return None if seq is None else tuple(it.id for it in seq)
    if not groups.get(top_color):
        return None
    top = groups[top_color].pop(0)
    below = _greedy_sequence(groups, top_color)
    if below is None:
        return None
    return tuple(it.id for it in reversed([top] + below))


def max_cardinality_colorful_packing(pool: Sequence[Item]) -> list[Item]:
    """Largest subset of ``pool`` that fits in one feasible bin.

    For every guess of the dominant colour c and its multiplicity k, take the
    k smallest items of c, cap every other colour at its k smallest, and add
    those in non-decreasing size order while capacity allows. The guess is
    usable when at least k - 1 other items fit.
    """
    if not pool:
        raise ValueError("pool must be nonempty")
    by_color: dict[int, list[Item]] = defaultdict(list)
    for it in sorted(pool, key=lambda it: (it.size, it.id)):
        by_color[it.color].append(it)

    best: list[Item] = []
    for c_star in sorted(by_color):
        for k_star in range(1, len(by_color[c_star]) + 1):
            base = by_color[c_star][:k_star]
            used = sum((it.size for it in base), Fraction(0))
            if used > 1:
                break
            others = sorted(
                (it for c, g in by_color.items() if c != c_star for it in g[:k_star]),
                key=lambda it: (it.size, it.color, it.id),
            )
            taken = []
            for it in others:
                if used + it.size > 1:
                    break
                used += it.size
                taken.append(it)
            if len(taken) < k_star - 1:
                continue
            if k_star + len(taken) > len(best):
                best = base + taken
    return best


def _sumset(a: int, b: int, mask: int) -> int:
    """Bitset of all pairwise sums of the weights in ``a`` and ``b``."""
    out = 0
    while b:
        low = b & -b
        out |= a << (low.bit_length() - 1)
        b ^= low
    return out & mask


def _count_weight_tables(weights: Sequence[int], mask: int) -> list[list[int]]:
    """``T[i][j]``: bitset of totals reachable with exactly j of the first i weights."""
    tables = [[1] + [0] * len(weights)]
    for i, w in enumerate(weights, start=1):
        prev = tables[-1]
        row = prev[:]
        for j in range(1, i + 1):
            row[j] |= (prev[j - 1] << w) & mask
        tables.append(row)
    return tables


def _pick(items: Sequence[Item], weights: Sequence[int], tables, count: int, total: int) -> list[Item]:
    chosen = []
    for i in range(len(items), 0, -1):
        if (tables[i - 1][count] >> total) & 1:
            continue
        chosen.append(items[i - 1])
        count -= 1
        total -= weights[i - 1]
    assert count == 0 and total == 0
    return chosen[::-1]


@dataclass
class _ColorTable:
    items: list[Item]
    weights: list[int]
    tables: list[list[int]]

    @property
    def exact(self) -> list[int]:
        return self.tables[-1]


def _combine(colors: list[_ColorTable], cap: int, mask: int) -> list[dict[int, int]]:
    """Layered DP over colours: ``layers[t][cnt]`` = bitset of weights using cnt items from the first t colours."""
    layers = [{0: 1}]
    for ct in colors:
        nxt: dict[int, int] = defaultdict(int)
        for cnt, bits in layers[-1].items():
            for j in range(min(cap, len(ct.items)) + 1):
                if ct.exact[j]:
                    s = _sumset(bits, ct.exact[j], mask)
                    if s:
                        nxt[cnt + j] |= s
        layers.append(dict(nxt))
    return layers


def colorful_subset_sum(pool: Sequence[Item], denominator: Optional[int] = None) -> list[Item]:
    """Heaviest subset of ``pool`` that fits in one feasible bin.

    Sizes are scaled by ``denominator`` (default: the lcm of the pool's size
    denominators). For each dominant colour c and count k an exact-count
    knapsack table per colour is combined across the other colours, each
    capped at k items and together contributing at least k - 1 items. Among
    the heaviest sets the one with most items wins, which keeps zero-size
    items out of later all-zero bins.
    """
    if not pool:
        raise ValueError("pool must be nonempty")
    d = denominator if denominator is not None else common_denominator(pool)
    mask = (1 << (d + 1)) - 1
    by_color: dict[int, list[Item]] = defaultdict(list)
    for it in sorted(pool, key=lambda it: (it.size, it.id)):
        by_color[it.color].append(it)
    tables: dict[int, _ColorTable] = {}
    for c, group in sorted(by_color.items()):
        weights = []
        for it in group:
            w = it.size * d
            if w.denominator != 1:
                raise ValueError(f"size {it.size} is not a multiple of 1/{d}")
            weights.append(int(w))
        tables[c] = _ColorTable(group, weights, _count_weight_tables(weights, mask))

    best_key = None
    best_plan = None
    for c_star in sorted(tables):
        others = [c for c in sorted(tables) if c != c_star]
        for k_star in range(1, len(tables[c_star].items) + 1):
            star_bits = tables[c_star].exact[k_star]
            if not star_bits:
                break
            layers = _combine([tables[c] for c in others], k_star, mask)
            for cnt, bits in sorted(layers[-1].items()):
                if cnt < k_star - 1:
                    continue
                total = _sumset(star_bits, bits, mask)
                if not total:
                    continue
                key = (total.bit_length() - 1, k_star + cnt)
                if best_key is None or key > best_key:
                    best_key = key
                    best_plan = (c_star, k_star, cnt, others, layers)

    c_star, k_star, cnt, others, layers = best_plan
    weight = best_key[0]
    star = tables[c_star]
    star_bits = star.exact[k_star]
    other_w = next(
        b for b in range(weight + 1)
        if (layers[-1][cnt] >> b) & 1 and (star_bits >> (weight - b)) & 1
    )
    chosen = _pick(star.items, star.weights, star.tables, k_star, weight - other_w)
    # walk the colour layers backwards
    for t in range(len(others), 0, -1):
        ct = tables[others[t - 1]]
        prev = layers[t - 1]
        found = None
        for j in range(min(k_star, len(ct.items)) + 1):
            if cnt - j not in prev:
                continue
            bits = ct.exact[j]
            while bits and found is None:
                low = bits & -bits
                w = low.bit_length() - 1
                if w <= other_w and (prev[cnt - j] >> (other_w - w)) & 1:
                    found = (j, w)
                bits ^= low
            if found:
                break
        j, w = found
        chosen += _pick(ct.items, ct.weights, ct.tables, j, w)
        cnt -= j
        other_w -= w
    assert cnt == 0 and other_w == 0
    return sorted(chosen, key=lambda it: it.id)


@dataclass(frozen=True)
class OpenedBin:
    bin_index: int
    subroutine: str
    items: Bin


def algorithm1_with_certificate(instance: GameInstance) -> tuple[Profile, list[OpenedBin]]:
    proportional = instance.cost_model is CostModel.PROPORTIONAL
    d = common_denominator(instance)
    pool = list(instance.items)
    bins: list[Bin] = []
    record: list[OpenedBin] = []
    while pool:
        if proportional:
            chosen, name = colorful_subset_sum(pool, d), "colorful_subset_sum"
        else:
            chosen, name = max_cardinality_colorful_packing(pool), "max_cardinality_colorful_packing"
        seq = order_bin(chosen)
        if seq is None:
            raise AssertionError("subroutine returned a set that cannot be ordered")
        record.append(OpenedBin(len(bins), name, seq))
        bins.append(seq)
        taken = set(seq)
        pool = [it for it in pool if it.id not in taken]
    return Profile.from_bins(instance, bins), record


def algorithm1(instance: GameInstance) -> Profile:
    return algorithm1_with_certificate(instance)[0]


def algorithm2(instance: GameInstance) -> Profile:
    """Greedy fill for uniform sizes.

    Fill the current bin up to kappa items, each time taking an item of the
    most frequent remaining colour other than the colour just placed (ties to
    the lowest colour index, then lowest id); open a new bin when the bin is
    full or only the just-placed colour remains.
    """
    kappa = uniform_meta(instance).kappa
    remaining: dict[int, list[int]] = defaultdict(list)
    for it in instance.items:
        remaining[it.color].append(it.id)
    left = instance.n
    bins: list[list[int]] = [[]]
    last = None
    while left:
        current = bins[-1]
        choices = [c for c, ids in remaining.items() if ids and c != last]
        if len(current) < kappa and choices:
            color = min(choices, key=lambda c: (-len(remaining[c]), c))
            current.append(remaining[color].pop(0))
            last = color
            left -= 1
        else:
            bins.append([])
            last = None
    return Profile.from_bins(instance, bins)

