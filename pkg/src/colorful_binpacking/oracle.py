"""Exhaustive ground truth for small games.

Items with equal ``(size, colour)`` are interchangeable for every quantity
computed here, so both the optimum and the equilibrium search work on type
count vectors instead of raw item subsets. With all items distinct this is
exactly the subset DP / brute force; with repeated types it is much smaller.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .core import (
    Bin,
    CapExceeded,
    ColorCounts,
    CostModel,
    GameInstance,
    Item,
    Profile,
    StructureError,
    is_feasible,
    orderable,
    share,
)
from .dynamics import is_nash
from .equilibria import order_bin


def _env_cap(name: str, default: int) -> int:
    value = os.environ.get(name)
    return int(value) if value else default


OPT_STATE_CAP = 2**20
NASH_ITEM_CAP = 8
NASH_NODE_CAP = 2_000_000
SOLVER_POOL_CAP = 12


def feasible_multiset(counts: ColorCounts | Mapping[int, int], total_size: Fraction) -> bool:
    """A multiset fits one feasible bin iff it fits and no colour exceeds half (rounded up)."""
    return total_size <= 1 and orderable(counts)


def top_feasible(color_counts: Mapping[int, int], top: int) -> bool:
    """Whether a clash-free sequence of these colours can end with ``top``."""
    if not color_counts.get(top):
        return False
    total = sum(color_counts.values())
    half = (total + 1) // 2
    if max(color_counts.values()) > half:
        return False
    if total % 2 == 1:
        # a colour holding (total+1)/2 items must take every odd slot, the top included
        return all(k < half or c == top for c, k in color_counts.items())
    return True


class _Types:
    """Items grouped by ``(size, colour)``."""

    def __init__(self, items: Sequence[Item], merge: bool = True):
        groups: dict[tuple, list[int]] = defaultdict(list)
        for it in sorted(items, key=lambda it: it.id):
            key = (it.size, it.color) if merge else (it.size, it.color, it.id)
            groups[key].append(it.id)
        keys = sorted(groups)
        self.sizes = [k[0] for k in keys]
        self.colors = [k[1] for k in keys]
        self.ids = [groups[k] for k in keys]
        self.counts = tuple(len(v) for v in self.ids)

    def __len__(self) -> int:
        return len(self.counts)

    def load(self, vec: Sequence[int]) -> Fraction:
        return sum((s * k for s, k in zip(self.sizes, vec) if k), Fraction(0))

    def color_counts(self, vec: Sequence[int]) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for c, k in zip(self.colors, vec):
            if k:
                out[c] += k
        return dict(out)

    def state_count(self) -> int:
        return math.prod(c + 1 for c in self.counts)

    def materialize(self, instance: GameInstance, bins: Iterable[tuple[Sequence[int], Optional[int]]]) -> Profile:
        """Turn ``(count vector, top colour)`` bins into a concrete profile."""
        queues = [list(ids) for ids in self.ids]
        seqs = []
        for vec, top in bins:
            chosen = [instance.item(queues[t].pop(0)) for t, k in enumerate(vec) for _ in range(k)]
            seq = order_bin(chosen, top)
            if seq is None:
                raise AssertionError("bin signature cannot be ordered")
            seqs.append(seq)
        return Profile.from_bins(instance, seqs)


@dataclass
class OptResult:
    opt: int
    witness: Profile

    def to_dict(self) -> dict:
        return {"opt": self.opt, "witness": {"bins": [list(b) for b in self.witness.bins if b]}}


class _ScaledTypes:
    """Integer view of ``_Types``: sizes times the common denominator, colours as 0-based slots."""

    def __init__(self, types: _Types):
        self.capacity = math.lcm(1, *(s.denominator for s in types.sizes))
        self.weights = [int(s * self.capacity) for s in types.sizes]
        palette = sorted(set(types.colors))
        self.slots = [palette.index(c) for c in types.colors]
        self.n_colors = len(palette)

    def lower_bound(self, state: Sequence[int]) -> int:
        """Bins needed by capacity, and by the most frequent colour needing separators."""
        total = sum(state)
        if not total:
            return 0
        weight = sum(w * k for w, k in zip(self.weights, state))
        per_color = [0] * self.n_colors
        for slot, k in zip(self.slots, state):
            per_color[slot] += k
        surplus = max(2 * k - total for k in per_color)
        return max(1, -(-weight // self.capacity), surplus)

    def bins_with(self, state: Sequence[int], first: int) -> Iterator[tuple[int, ...]]:
        """Feasible bin vectors within ``state`` holding at least one item of type ``first``."""
        n_types = len(state)
        vec = [0] * n_types
        per_color = [0] * self.n_colors

        def rec(t: int, used: int, count: int) -> Iterator[tuple[int, ...]]:
            if t == n_types:
                if max(per_color) <= (count + 1) // 2:
                    yield tuple(vec)
                return
            w, slot = self.weights[t], self.slots[t]
            lo = 1 if t == first else 0
            hi = state[t]
            if w:
                hi = min(hi, (self.capacity - used) // w)
            # larger bins first, so good solutions are found early
            for k in range(hi, lo - 1, -1):
                vec[t] = k
                per_color[slot] += k
                yield from rec(t + 1, used + w * k, count + k)
                per_color[slot] -= k
            vec[t] = 0

        yield from rec(first, 0, 0)


def optimal_bins(instance: GameInstance, cap: Optional[int] = None) -> OptResult:
    """Minimum number of feasible bins, by DP over remaining type counts.

    ``cap`` bounds the number of DP states (product of type counts + 1);
    for pairwise distinct items that is ``2**n``. A candidate first bin is
    skipped when a lower bound on the rest shows it cannot beat the best
    value found so far, so every stored value is still exact.
    """
    cap = cap if cap is not None else _env_cap("COLORBIN_OPT_CAP", OPT_STATE_CAP)
    types = _Types(instance.items)
    if types.state_count() > cap:
        raise CapExceeded(f"{types.state_count()} DP states exceed the cap of {cap}")
    scaled = _ScaledTypes(types)
    memo: dict[tuple[int, ...], tuple[int, Optional[tuple[int, ...]]]] = {}

    def best(state: tuple[int, ...]) -> int:
        if state in memo:
            return memo[state][0]
        first = next((t for t, k in enumerate(state) if k), None)
        if first is None:
            memo[state] = (0, None)
            return 0
        floor = scaled.lower_bound(state)
        value, choice = math.inf, None
        for vec in scaled.bins_with(state, first):
            rest = tuple(a - b for a, b in zip(state, vec))
            if 1 + scaled.lower_bound(rest) >= value:
                continue
            cost = 1 + best(rest)
            if cost < value:
                value, choice = cost, vec
                if value == floor:
                    break
        memo[state] = (value, choice)
        return value

    state = types.counts
    opt = best(state)
    chosen = []
    while any(state):
        vec = memo[state][1]
        chosen.append((vec, None))
        state = tuple(a - b for a, b in zip(state, vec))
    return OptResult(opt, types.materialize(instance, chosen))


@dataclass(frozen=True)
class _Signature:
    vec: tuple[int, ...]
    top: int
    count: int
    load: Fraction


def _signatures(types: _Types) -> list[_Signature]:
    sigs = []
    for vec in itertools.product(*(range(c + 1) for c in types.counts)):
        if not any(vec):
            continue
        ld = types.load(vec)
        if ld > 1:
            continue
        cc = types.color_counts(vec)
        for top in sorted(cc):
            if top_feasible(cc, top):
                sigs.append(_Signature(vec, top, sum(vec), ld))
    return sigs


def _blocks_move(types: _Types, model: CostModel, a: _Signature, b: _Signature) -> bool:
    """True if some item of bin ``a`` strictly gains by moving on top of bin ``b``."""
    for t, k in enumerate(a.vec):
        if not k or types.colors[t] == b.top:
            continue
        s = types.sizes[t]
        if b.load + s > 1:
            continue
        if share(s, b.count + 1, b.load + s, model) < share(s, a.count, a.load, model):
            return True
    return False


def _nash_bin_multisets(types: _Types, model: CostModel, node_cap: int) -> list[tuple[_Signature, ...]]:
    """All multisets of bin signatures covering every item with no pairwise improving move.

    In a feasible profile a deviation only involves the mover's bin and the
    target bin (moves into empty bins never pay off), so equilibria are exactly
    the pairwise-compatible covers. Multisets are generated once each by always
    extending with a bin holding the first uncovered type, in non-decreasing
    signature order while that type stays first.
    """
    sigs = _signatures(types)
    by_type: list[list[int]] = [[] for _ in range(len(types))]
    for idx, sig in enumerate(sigs):
        for t, k in enumerate(sig.vec):
            if k:
                by_type[t].append(idx)
    compat_cache: dict[tuple[int, int], bool] = {}

    def compatible(i: int, j: int) -> bool:
        key = (i, j) if i <= j else (j, i)
        if key not in compat_cache:
            a, b = sigs[i], sigs[j]
            compat_cache[key] = not (
                _blocks_move(types, model, a, b) or _blocks_move(types, model, b, a)
            )
        return compat_cache[key]

    results: list[tuple[_Signature, ...]] = []
    chosen: list[int] = []
    nodes = 0

    def rec(remaining: tuple[int, ...], lower: int) -> None:
        nonlocal nodes
        first = next((t for t, k in enumerate(remaining) if k), None)
        if first is None:
            results.append(tuple(sigs[i] for i in chosen))
            return
        for idx in by_type[first]:
            if idx < lower:
                continue
            vec = sigs[idx].vec
            if any(v > r for v, r in zip(vec, remaining)):
                continue
            if not all(compatible(idx, j) for j in chosen):
                continue
            nodes += 1
            if nodes > node_cap:
                raise CapExceeded(f"equilibrium search exceeded {node_cap} nodes")
            rest = tuple(r - v for r, v in zip(remaining, vec))
            chosen.append(idx)
            rec(rest, idx if rest[first] else 0)
            chosen.pop()

    rec(types.counts, 0)
    return results


@dataclass(frozen=True)
class NashClass:
    """Equilibria that agree up to bin renumbering and swapping identical items."""

    representative: Profile
    bins: tuple[tuple[tuple[int, ...], int], ...]

    @property
    def social_cost(self) -> int:
        return len(self.bins)


def nash_classes(instance: GameInstance, node_cap: Optional[int] = None) -> list[NashClass]:
    node_cap = node_cap if node_cap is not None else _env_cap("COLORBIN_NASH_NODES", NASH_NODE_CAP)
    types = _Types(instance.items)
    out = []
    for combo in _nash_bin_multisets(types, instance.cost_model, node_cap):
        spec = tuple((sig.vec, sig.top) for sig in combo)
        rep = types.materialize(instance, spec)
        if not is_nash(rep):
            raise AssertionError("pairwise-compatible cover is not an equilibrium")
        out.append(NashClass(rep, spec))
    return out


def _orderings_with_top(items: Sequence[Item], top: int) -> list[Bin]:
    """Every clash-free bottom-to-top sequence of ``items`` whose top has colour ``top``."""
    out: list[Bin] = []
    n = len(items)
    seq: list[Item] = []
    used = [False] * n

    def rec() -> None:
        if len(seq) == n:
            if seq[-1].color == top:
                out.append(tuple(it.id for it in seq))
            return
        for i, it in enumerate(items):
            if used[i] or (seq and seq[-1].color == it.color):
                continue
            used[i] = True
            seq.append(it)
            rec()
            seq.pop()
            used[i] = False

    rec()
    return out


def enumerate_nash(instance: GameInstance, cap: Optional[int] = None) -> list[Profile]:
    """Every Nash equilibrium, each listed once up to bin renumbering (canonical form)."""
    cap = cap if cap is not None else _env_cap("COLORBIN_NASH_CAP", NASH_ITEM_CAP)
    if instance.n > cap:
        raise CapExceeded(f"n={instance.n} exceeds the enumeration cap of {cap}")
    types = _Types(instance.items, merge=False)
    profiles = []
    for combo in _nash_bin_multisets(types, instance.cost_model, NASH_NODE_CAP):
        options = []
        for sig in combo:
            members = [instance.item(types.ids[t][0]) for t, k in enumerate(sig.vec) if k]
            options.append(_orderings_with_top(members, sig.top))
        for bins in itertools.product(*options):
            profiles.append(Profile.from_bins(instance, bins).canonical())
    profiles.sort(key=lambda p: p.canonical_key())
    return profiles


@dataclass
class RatioReport:
    opt: int
    best_ne: int
    worst_ne: int
    ne_count: int

    @property
    def pos(self) -> Fraction:
        return Fraction(self.best_ne, self.opt)

    @property
    def poa(self) -> Fraction:
        return Fraction(self.worst_ne, self.opt)

    def to_dict(self) -> dict:
        return {
            "opt": self.opt,
            "best_ne": self.best_ne,
            "worst_ne": self.worst_ne,
            "ne_count": self.ne_count,
            "pos": str(self.pos),
            "poa": str(self.poa),
        }


def exact_ratios(
    instance: GameInstance, opt_cap: Optional[int] = None, node_cap: Optional[int] = None
) -> RatioReport:
    opt = optimal_bins(instance, opt_cap).opt
    costs = [c.social_cost for c in nash_classes(instance, node_cap)]
    if not costs:
        raise AssertionError("no equilibrium found; existence is guaranteed")
    return RatioReport(opt, min(costs), max(costs), len(costs))


@dataclass(frozen=True)
class BWDecomposition:
    s_b: int
    s_w: int
    m_b: int
    m_w: int
    n_black: int
    n_white: int


BLACK, WHITE = 1, 2


def bw_decompose(profile: Profile) -> BWDecomposition:
    inst = profile.instance
    if inst.m != 2:
        raise StructureError("black-and-white decomposition needs m = 2")
    s_b = s_w = m_b = m_w = 0
    for b in profile.bins:
        if not b:
            continue
        black_top = inst.color(b[-1]) == BLACK
        if len(b) == 1:
            s_b += black_top
            s_w += not black_top
        else:
            m_b += black_top
            m_w += not black_top
    n_black = sum(1 for it in inst.items if it.color == BLACK)
    return BWDecomposition(s_b, s_w, m_b, m_w, n_black, inst.n - n_black)


def lemma_k_check(profile: Profile, opt: Optional[int] = None) -> bool:
    """``|S_b| - |S_w| - |M_w| <= OPT`` for a feasible two-colour profile."""
    if not is_feasible(profile):
        raise StructureError("the inequality is stated for feasible profiles")
    d = bw_decompose(profile)
    if opt is None:
        opt = optimal_bins(profile.instance).opt
    return d.s_b - d.s_w - d.m_w <= opt


def _feasible_subsets(pool: Sequence[Item]) -> Iterator[tuple[Item, ...]]:
    if len(pool) > SOLVER_POOL_CAP:
        raise CapExceeded(f"pool of {len(pool)} items exceeds {SOLVER_POOL_CAP}")
    for r in range(len(pool) + 1):
        for subset in itertools.combinations(pool, r):
            total = sum((it.size for it in subset), Fraction(0))
            if feasible_multiset(ColorCounts.of(it.color for it in subset), total):
                yield subset


def brute_force_mccp(pool: Sequence[Item]) -> int:
    return max(len(s) for s in _feasible_subsets(pool))


def brute_force_css(pool: Sequence[Item]) -> Fraction:
    return max(sum((it.size for it in s), Fraction(0)) for s in _feasible_subsets(pool))


__all__ = [
    "BWDecomposition",
    "NashClass",
    "OptResult",
    "RatioReport",
    "brute_force_css",
    "brute_force_mccp",
    "bw_decompose",
    "enumerate_nash",
    "exact_ratios",
    "feasible_multiset",
    "lemma_k_check",
    "nash_classes",
    "optimal_bins",
    "top_feasible",
]
