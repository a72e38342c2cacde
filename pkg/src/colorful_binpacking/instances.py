"""Generators for the worst-case families and for seeded random games.

Each family builder returns a :class:`GeneratedCase` whose witness profiles
are checked on construction: ``"sigma"`` must be an equilibrium,
``"sigma_star"`` must be feasible, and every ``F_<name>`` entry in
``expected`` must equal the witness's open-bin count. Parameters for which a
check fails are refused with ``ValueError``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import CostModel, GameInstance, Item, Profile, is_feasible, make_instance, social_cost
from .dynamics import is_nash
from .equilibria import algorithm1, order_bin

BLACK, WHITE = 1, 2


@dataclass
class GeneratedCase:
    instance: GameInstance
    witnesses: dict[str, Profile] = field(default_factory=dict)
    expected: dict[str, Fraction | int] = field(default_factory=dict)
    provenance: str = ""
    params: dict[str, object] = field(default_factory=dict)

    def verify(self) -> list[tuple[str, bool]]:
        """Named checks of the witness contract, in a stable order."""
        checks = []
        if "sigma" in self.witnesses:
            checks.append(("sigma is an equilibrium", is_nash(self.witnesses["sigma"])))
        if "sigma_star" in self.witnesses:
            checks.append(("sigma_star is feasible", is_feasible(self.witnesses["sigma_star"])))
        for name, profile in sorted(self.witnesses.items()):
            key = f"F_{name}"
            if key in self.expected:
                checks.append((f"{key} = {self.expected[key]}", social_cost(profile) == self.expected[key]))
        return checks


def _finish(case: GeneratedCase) -> GeneratedCase:
    failed = [name for name, ok in case.verify() if not ok]
    if failed:
        raise ValueError(f"{case.provenance}{case.params}: witness checks failed: {failed}")
    return case


class _Builder:
    """Collects typed item groups and turns grouped bin recipes into profiles."""

    def __init__(self) -> None:
        self.specs: list[tuple[Fraction, int]] = []
        self.groups: dict[str, list[int]] = {}

    def add(self, name: str, count: int, size: Fraction, color: int) -> None:
        start = len(self.specs) + 1
        self.specs += [(Fraction(size), color)] * count
        self.groups.setdefault(name, []).extend(range(start, start + count))

    def instance(self, m: int, model: CostModel) -> GameInstance:
        return make_instance(self.specs, m, model)

    def profile(self, inst: GameInstance, recipes: Sequence[dict[str, int]]) -> Profile:
        queues = {name: list(ids) for name, ids in self.groups.items()}
        bins = []
        for recipe in recipes:
            members = [inst.item(queues[name].pop(0)) for name, k in recipe.items() for _ in range(k)]
            seq = order_bin(members)
            if seq is None:
                raise ValueError(f"bin recipe {recipe} cannot be ordered")
            bins.append(seq)
        leftover = [name for name, q in queues.items() if q]
        if leftover:
            raise ValueError(f"recipes leave items of groups {leftover} unpacked")
        return Profile.from_bins(inst, bins)


def gen_prop1() -> GeneratedCase:
    """Three black and three white items of size 1/4; non-valid improving moves can cycle."""
    b = _Builder()
    b.add("black", 3, Fraction(1, 4), BLACK)
    b.add("white", 3, Fraction(1, 4), WHITE)
    inst = b.instance(2, CostModel.EGALITARIAN)
    star = b.profile(inst, [{"black": 2, "white": 2}, {"black": 1, "white": 1}])
    return _finish(GeneratedCase(inst, {"sigma_star": star}, {"F_sigma_star": 2}, "prop1", {}))


def gen_pos_m3_egalitarian(m: int, h: int, k: int) -> GeneratedCase:
    """White items of size 1/k - h*delta plus tiny items of every other colour.

    Colour 1 plays white. ``sigma`` is the equilibrium computed by
    ``algorithm1``; ``expected["ne_lower_bound"]`` is k(h - 1 - h/(m-1)).
    """
    if m < 3 or h < 2 or k < 1 or k % m:
        raise ValueError("need m >= 3, h >= 2 and k a positive multiple of m")
    per_color, rem = divmod(h * (k - 1), m - 1)
    if rem:
        raise ValueError("h(k-1) must be divisible by m-1")
    delta = Fraction(1, 2 * h * k * (k + 1))
    assert 0 < delta < Fraction(1, h * k * (k + 1))
    b = _Builder()
    b.add("white", h * k, Fraction(1, k) - h * delta, 1)
    for c in range(2, m + 1):
        b.add(f"c{c}", per_color, delta, c)
    inst = b.instance(m, CostModel.EGALITARIAN)

    # spread the non-white items over h bins, k-1 per bin
    others = [f"c{c}" for c in range(2, m + 1) for _ in range(per_color)]
    recipes = []
    for j in range(h):
        recipe: dict[str, int] = {"white": k}
        for name in others[j * (k - 1):(j + 1) * (k - 1)]:
            recipe[name] = recipe.get(name, 0) + 1
        recipes.append(recipe)
    star = b.profile(inst, recipes)
    sigma = algorithm1(inst)
    bound = k * (h - 1 - Fraction(h, m - 1))
    case = GeneratedCase(
        inst,
        {"sigma": sigma, "sigma_star": star},
        {"F_sigma_star": h, "F_sigma": social_cost(sigma), "ne_lower_bound": bound, "delta": delta},
        "pos_m3_egalitarian",
        {"m": m, "h": h, "k": k},
    )
    if social_cost(sigma) < bound:
        raise ValueError("equilibrium beats the stated lower bound")
    return _finish(case)


def gen_pos_m3_proportional(n: int) -> GeneratedCase:
    """One big item of colour 1, n/2 - 1 items of size 1 - big, and n/2 tiny items of colours 2, 3."""
    if n < 4 or n % 4:
        raise ValueError("n must be a positive multiple of 4")
    eps = Fraction(1, n)
    a = 1 - Fraction(2, n) + eps
    small = 1 - a
    c = Fraction(2, n) * (Fraction(2, n) - eps)
    assert 0 < eps < Fraction(2, n) and 0 < c <= Fraction(2, n) * (Fraction(2, n) - eps)
    assert a + c * n / 2 <= 1
    b = _Builder()
    b.add("big", 1, a, 1)
    b.add("small", n // 2 - 1, small, 1)
    b.add("c2", n // 4, c, 2)
    b.add("c3", n // 4, c, 3)
    inst = b.instance(3, CostModel.PROPORTIONAL)
    star = b.profile(inst, [{"big": 1}, {"small": n // 2 - 1, "c2": n // 4, "c3": n // 4}])
    sigma = algorithm1(inst)
    small_ids = set(b.groups["small"])
    small_singletons = sum(1 for bin_ in sigma.bins if len(bin_) == 1 and bin_[0] in small_ids)
    case = GeneratedCase(
        inst,
        {"sigma": sigma, "sigma_star": star},
        {
            "F_sigma_star": 2,
            "F_sigma": social_cost(sigma),
            "small_singletons": small_singletons,
            "small_singletons_lower_bound": n // 2 - 5,
            "a": a,
            "b": small,
            "c": c,
        },
        "pos_m3_proportional",
        {"n": n},
    )
    return _finish(case)


def _pos3_bw(k: int, model: CostModel, sizes: dict[str, Fraction], delta: Fraction) -> GeneratedCase:
    b = _Builder()
    b.add("t1", 2 * k, sizes["t1"], WHITE)
    b.add("t2", k // 2, sizes["t2"], BLACK)
    b.add("t3", 2 * k, sizes["t3"], BLACK)
    b.add("t4", k, sizes["t4"], WHITE)
    inst = b.instance(2, model)
    sigma = b.profile(
        inst,
        [{"t1": k, "t4": k, "t3": 2 * k}] + [{"t1": 1}] * k + [{"t2": 1}] * (k // 2),
    )
    star = b.profile(inst, [{"t1": k, "t3": k}] * 2 + [{"t2": 1, "t4": 2}] * (k // 2))
    f_sigma, f_star = 3 * k // 2 + 1, k // 2 + 2
    return _finish(
        GeneratedCase(
            inst,
            {"sigma": sigma, "sigma_star": star},
            {
                "F_sigma": f_sigma,
                "F_sigma_star": f_star,
                "ratio": Fraction(f_sigma, f_star),
                "ratio_formula": 3 - Fraction(10, k + 4),
                "delta": delta,
            },
            f"pos3_bw_{model.value}",
            {"k": k},
        )
    )


def _check_even_k(k: int) -> None:
    if k < 2 or k % 2:
        raise ValueError("k must be an even integer >= 2")


def gen_pos3_bw_egalitarian(k: int) -> GeneratedCase:
    _check_even_k(k)
    delta = Fraction(1, 4 * k * (k + 1))
    # k + 1 items of the large white type must not fit together
    assert (k + 1) * (Fraction(1, k) - 2 * delta) > 1
    sizes = {"t1": Fraction(1, k) - 2 * delta, "t2": Fraction(1), "t3": delta, "t4": Fraction(0)}
    return _pos3_bw(k, CostModel.EGALITARIAN, sizes, delta)


def gen_pos3_bw_proportional(k: int) -> GeneratedCase:
    _check_even_k(k)
    delta = Fraction(1, 2 * k * (5 * k + 3))
    assert 0 < delta < Fraction(1, k * (5 * k + 3))
    sizes = {"t1": Fraction(1, k) - 3 * delta, "t2": 1 - 5 * k * delta, "t3": delta, "t4": delta}
    return _pos3_bw(k, CostModel.PROPORTIONAL, sizes, delta)


def gen_pos2_uniform(k: int) -> GeneratedCase:
    """k(k+1)/2 items of size 1/k, k^2/4 + k/2 of them white."""
    _check_even_k(k)
    half = k // 2
    b = _Builder()
    b.add("white", k * k // 4 + half, Fraction(1, k), WHITE)
    b.add("black", k * k // 4, Fraction(1, k), BLACK)
    inst = b.instance(2, CostModel.EGALITARIAN)
    star = b.profile(inst, [{"white": half, "black": half - 1}] * half + [{"white": half, "black": half}])
    sigma = b.profile(inst, [{"white": half, "black": half}] * half + [{"white": 1}] * half)
    return _finish(
        GeneratedCase(
            inst,
            {"sigma": sigma, "sigma_star": star},
            {"F_sigma": k, "F_sigma_star": half + 1, "ratio": Fraction(k, half + 1)},
            "pos2_uniform",
            {"k": k},
        )
    )


def gen_poa_unbounded_uniform(k: int, odd_variant: bool = False) -> GeneratedCase:
    """2k items of colour 1 and k each of colours 2, 3; the odd variant adds one more of colour 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = 4 * k + (1 if odd_variant else 0)
    size = Fraction(1, n)
    b = _Builder()
    if odd_variant:
        b.add("b0", 1, size, 1)
    b.add("b", 2 * k, size, 1)
    b.add("w", k, size, 2)
    b.add("r", k, size, 3)
    inst = b.instance(3, CostModel.EGALITARIAN)
    ids = b.groups
    star = Profile.from_bins(inst, [order_bin(inst.items)])
    big = list(ids.get("b0", []))
    for w, r in zip(ids["w"], ids["r"]):
        big += [w, r]
    big.append(ids["b"][0])
    sigma = Profile.from_bins(inst, [tuple(big)] + [(i,) for i in ids["b"][1:]])
    return _finish(
        GeneratedCase(
            inst,
            {"sigma": sigma, "sigma_star": star},
            {"F_sigma": 2 * k, "F_sigma_star": 1, "ratio": Fraction(2 * k)},
            "poa_unbounded_uniform",
            {"k": k, "odd_variant": odd_variant},
        )
    )


def gen_poa3_uniform_odd(k: int) -> GeneratedCase:
    """k(k+3)/2 items of size 1/k, (k^2+4k-1)/4 of them white."""
    if k < 3 or k % 2 == 0:
        raise ValueError("k must be an odd integer >= 3")
    lo, hi = (k - 1) // 2, (k + 1) // 2
    b = _Builder()
    b.add("white", (k * k + 4 * k - 1) // 4, Fraction(1, k), WHITE)
    b.add("black", (k + 1) ** 2 // 4, Fraction(1, k), BLACK)
    inst = b.instance(2, CostModel.EGALITARIAN)
    star = b.profile(inst, [{"white": hi, "black": lo}] * hi + [{"white": lo, "black": hi}])
    sigma = b.profile(inst, [{"white": lo, "black": hi}] * hi + [{"white": 1}] * k)
    f_sigma, f_star = (3 * k + 1) // 2, hi + 1
    return _finish(
        GeneratedCase(
            inst,
            {"sigma": sigma, "sigma_star": star},
            {
                "F_sigma": f_sigma,
                "F_sigma_star": f_star,
                "ratio": Fraction(f_sigma, f_star),
                "ratio_formula": 3 - Fraction(8, k + 3),
            },
            "poa3_uniform_odd",
            {"k": k},
        )
    )


SIZE_FAMILIES = ("uniform", "grid", "zero-heavy")


def gen_random(
    n: int,
    m: int,
    size_family: str = "grid",
    seed: int = 0,
    cost_model: CostModel | str = CostModel.EGALITARIAN,
    kappa: Optional[int] = None,
    denominator: int = 8,
) -> GameInstance:
    """Seeded random game.

    ``uniform``: every item has size 1/kappa (kappa drawn from 2..n+1 if not given).
    ``grid``: sizes j/D with 1 <= j <= D/2.
    ``zero-heavy``: each size is 0 with probability 1/2, otherwise as in ``grid``.
    """
    if size_family not in SIZE_FAMILIES:
        raise ValueError(f"size_family must be one of {SIZE_FAMILIES}")
    if n < 1 or m < 2:
        raise ValueError("need n >= 1 and m >= 2")
    rng = random.Random(seed)
    colors = [rng.randint(1, m) for _ in range(n)]
    if size_family == "uniform":
        kappa = kappa if kappa is not None else rng.randint(2, n + 1)
        sizes = [Fraction(1, kappa)] * n
    else:
        top = max(1, denominator // 2)
        sizes = []
        for _ in range(n):
            if size_family == "zero-heavy" and rng.random() < 0.5:
                sizes.append(Fraction(0))
            else:
                sizes.append(Fraction(rng.randint(1, top), denominator))
    items = tuple(Item(i, s, c) for i, (s, c) in enumerate(zip(sizes, colors), start=1))
    return GameInstance(items, m, CostModel(cost_model))


@dataclass(frozen=True)
class Family:
    build: Callable[..., GeneratedCase]
    params: tuple[str, ...]


FAMILIES: dict[str, Family] = {
    "prop1": Family(gen_prop1, ()),
    "pos_m3_egalitarian": Family(gen_pos_m3_egalitarian, ("m", "h", "k")),
    "pos_m3_proportional": Family(gen_pos_m3_proportional, ("n",)),
    "pos3_bw_egalitarian": Family(gen_pos3_bw_egalitarian, ("k",)),
    "pos3_bw_proportional": Family(gen_pos3_bw_proportional, ("k",)),
    "pos2_uniform": Family(gen_pos2_uniform, ("k",)),
    "poa_unbounded_uniform": Family(gen_poa_unbounded_uniform, ("k", "odd_variant")),
    "poa3_uniform_odd": Family(gen_poa3_uniform_odd, ("k",)),
}
