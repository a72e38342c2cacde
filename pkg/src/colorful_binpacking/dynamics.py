"""Improving deviations, potentials, best-response dynamics and cycle search."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .core import (
    INFINITE,
    Bin,
    Cost,
    CostModel,
    GameInstance,
    Profile,
    StructureError,
    bin_is_feasible,
    common_denominator,
    player_cost,
    share,
)

POLICIES = ("first", "random", "max-gain")
DEFAULT_CYCLE_CAP = 10**6


@dataclass(frozen=True)
class Deviation:
    item_id: int
    target_bin: int
    valid: bool


def cost_after_move(profile: Profile, item_id: int, target: int) -> Cost:
    """Cost of ``item_id`` once it sits on top of bin ``target``."""
    inst = profile.instance
    dest = profile.bins[target]
    color = inst.color(item_id)
    if dest and inst.color(dest[-1]) == color:
        return INFINITE
    size = inst.size(item_id)
    return share(size, len(dest) + 1, profile.loads[target] + size, inst.cost_model)


def iter_improving_deviations(profile: Profile) -> Iterator[Deviation]:
    inst = profile.instance
    for item in inst.items:
        src = profile.bin_of(item.id)
        current = player_cost(profile, item.id)
        for j, dest in enumerate(profile.bins):
            if j == src or profile.loads[j] + item.size > 1:
                continue
            if cost_after_move(profile, item.id, j) < current:
                yield Deviation(item.id, j, bin_is_feasible(dest, inst))


def enumerate_improving_deviations(profile: Profile) -> list[Deviation]:
    """All strictly improving moves, ordered by item id then target bin index."""
    return list(iter_improving_deviations(profile))


def is_nash(profile: Profile) -> bool:
    return next(iter_improving_deviations(profile), None) is None


def apply_deviation(profile: Profile, deviation: Deviation) -> Profile:
    src = profile.bin_of(deviation.item_id)
    tgt = deviation.target_bin
    if tgt == src:
        raise StructureError("deviation target equals the current bin")
    if profile.loads[tgt] + profile.instance.size(deviation.item_id) > 1:
        raise StructureError("deviation violates the target bin capacity")
    bins = list(profile.bins)
    bins[src] = tuple(i for i in bins[src] if i != deviation.item_id)
    bins[tgt] = bins[tgt] + (deviation.item_id,)
    return Profile(profile.instance, tuple(bins))


def potential_egalitarian(profile: Profile) -> int:
    inst = profile.instance
    return sum(len(b) ** len(b) for b in profile.bins if b and bin_is_feasible(b, inst))


def potential_proportional(profile: Profile) -> int:
    """Sum of ``3 ** (load * D)`` over feasible open bins.

    Distinct subset sums differ by at least ``1/D``, so base 3 per scaled unit
    plays the role of a base whose power over the minimum gap exceeds 2.
    """
    inst = profile.instance
    d = common_denominator(inst)
    total = 0
    for b, ld in zip(profile.bins, profile.loads):
        if b and bin_is_feasible(b, inst):
            scaled = ld * d
            assert scaled.denominator == 1
            total += 3 ** int(scaled)
    return total


def potential(profile: Profile) -> int:
    if profile.instance.cost_model is CostModel.EGALITARIAN:
        return potential_egalitarian(profile)
    return potential_proportional(profile)


@dataclass(frozen=True)
class Step:
    deviation: Deviation
    profile: Profile
    potential: int


@dataclass
class DynamicsTrace:
    initial: Profile
    steps: list[Step] = field(default_factory=list)
    terminated: bool = False
    valid_only: bool = True

    @property
    def terminal(self) -> Profile:
        return self.steps[-1].profile if self.steps else self.initial

    @property
    def potentials(self) -> list[int]:
        return [potential(self.initial)] + [s.potential for s in self.steps]


class DynamicsDidNotConverge(RuntimeError):
    pass


def _gain(profile: Profile, dev: Deviation) -> Cost:
    before = player_cost(profile, dev.item_id)
    after = cost_after_move(profile, dev.item_id, dev.target_bin)
    if before == INFINITE:
        # any escape from a misplaced position beats every finite gain
        return INFINITE
    return before - after


def _choose(profile: Profile, moves: list[Deviation], policy: str, rng: random.Random) -> Deviation:
    if policy == "first":
        return moves[0]
    if policy == "random":
        return rng.choice(moves)
    if policy == "max-gain":
        best, best_gain = moves[0], _gain(profile, moves[0])
        for dev in moves[1:]:
            g = _gain(profile, dev)
            if g > best_gain:
                best, best_gain = dev, g
        return best
    raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")


def run_dynamics(
    instance: GameInstance,
    initial: Optional[Profile] = None,
    policy: str = "first",
    seed: int = 0,
    valid_only: bool = True,
    max_steps: int = 100_000,
) -> DynamicsTrace:
    """Apply improving deviations chosen by ``policy`` until none is left.

    With ``valid_only`` the run is guaranteed to stop; hitting ``max_steps``
    then raises :class:`DynamicsDidNotConverge`. Without it the trace is simply
    cut at ``max_steps`` with ``terminated=False``.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    profile = initial if initial is not None else Profile.singletons(instance)
    rng = random.Random(seed)
    trace = DynamicsTrace(initial=profile, valid_only=valid_only)
    for step in range(max_steps + 1):
        moves = enumerate_improving_deviations(profile)
        if valid_only:
            moves = [d for d in moves if d.valid]
        if not moves:
            trace.terminated = True
            return trace
        if step == max_steps:
            break
        dev = _choose(profile, moves, policy, rng)
        profile = apply_deviation(profile, dev)
        trace.steps.append(Step(dev, profile, potential(profile)))
    if valid_only:
        raise DynamicsDidNotConverge(f"no equilibrium after {max_steps} valid steps")
    return trace


def run_valid_dynamics(
    instance: GameInstance,
    initial: Optional[Profile] = None,
    policy: str = "first",
    seed: int = 0,
    max_steps: int = 100_000,
) -> DynamicsTrace:
    return run_dynamics(instance, initial, policy, seed, True, max_steps)


@dataclass
class CycleSearchResult:
    status: str  # "cycle", "acyclic" or "inconclusive"
    cycle: Optional[list[tuple[Profile, Deviation]]] = None
    states_explored: int = 0

    @property
    def found(self) -> bool:
        return self.status == "cycle"


def _successors(instance: GameInstance, key, allow_nonvalid: bool):
    profile = Profile.from_bins(instance, key)
    first_empty = None
    for dev in iter_improving_deviations(profile):
        if not (dev.valid or allow_nonvalid):
            continue
        if not profile.bins[dev.target_bin]:
            # all empty bins are interchangeable
            if first_empty is None:
                first_empty = dev.target_bin
            elif dev.target_bin != first_empty:
                continue
        yield dev, apply_deviation(profile, dev).canonical_key()


def all_profile_keys(instance: GameInstance) -> Iterator[tuple[Bin, ...]]:
    """Every capacity-respecting profile up to bin renumbering, as canonical keys.

    Items are inserted one at a time either into a fresh bin or at any
    position of an existing bin, which produces each set of sequences once.
    """
    items = instance.items
    bins: list[list[int]] = []
    loads: list = []

    def rec(i: int):
        if i == len(items):
            yield tuple(sorted((tuple(b) for b in bins), key=lambda b: (len(b), b)))
            return
        it = items[i]
        for j, b in enumerate(bins):
            if loads[j] + it.size > 1:
                continue
            loads[j] += it.size
            for pos in range(len(b) + 1):
                b.insert(pos, it.id)
                yield from rec(i + 1)
                del b[pos]
            loads[j] -= it.size
        bins.append([it.id])
        loads.append(it.size)
        yield from rec(i + 1)
        bins.pop()
        loads.pop()

    yield from rec(0)


def find_deviation_cycle(
    instance: GameInstance,
    start: Optional[Profile] = None,
    allow_nonvalid: bool = True,
    cap: int = DEFAULT_CYCLE_CAP,
) -> CycleSearchResult:
    """Depth-first search for a cycle of improving deviations.

    States are profiles up to bin renumbering. With ``start`` only the part of
    the graph reachable from it is searched; without it every profile is used
    as a root, so ``"acyclic"`` certifies that the whole graph is a DAG.
    Returns status ``"cycle"`` with the closed walk as ``(profile, deviation)``
    pairs, ``"acyclic"`` when the search finished without a back edge, or
    ``"inconclusive"`` once more than ``cap`` states were visited.
    """
    roots = [start.canonical_key()] if start is not None else all_profile_keys(instance)
    on_stack: dict = {}
    done: set = set()
    explored = 0
    for root in roots:
        if root in done:
            continue
        explored += 1
        if explored > cap:
            return CycleSearchResult("inconclusive", None, explored)
        # frames: (key, successor iterator); path_devs[i] leads into frame i + 1
        stack = [(root, _successors(instance, root, allow_nonvalid))]
        path_devs: list[Deviation] = []
        on_stack[root] = 0
        while stack:
            key, succ = stack[-1]
            nxt = next(succ, None)
            if nxt is None:
                stack.pop()
                del on_stack[key]
                done.add(key)
                if path_devs:
                    path_devs.pop()
                continue
            dev, child = nxt
            if child in on_stack:
                start_idx = on_stack[child]
                keys = [k for k, _ in stack[start_idx:]]
                devs = path_devs[start_idx:] + [dev]
                cycle = [(Profile.from_bins(instance, k), d) for k, d in zip(keys, devs)]
                return CycleSearchResult("cycle", cycle, explored)
            if child in done:
                continue
            explored += 1
            if explored > cap:
                return CycleSearchResult("inconclusive", None, explored)
            on_stack[child] = len(stack)
            path_devs.append(dev)
            stack.append((child, _successors(instance, child, allow_nonvalid)))
    return CycleSearchResult("acyclic", None, explored)


def trace_potentials_increasing(trace: DynamicsTrace) -> bool:
    pots = trace.potentials
    return all(a < b for a, b in zip(pots, pots[1:]))

