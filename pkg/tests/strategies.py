from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from colorful_binpacking import CostModel, GameInstance, Item, Profile


@st.composite
def instances(draw, max_n=6, max_m=3, denominator=6, allow_zero=True, models=("egalitarian", "proportional")):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(2, max_m))
    lo = 0 if allow_zero else 1
    items = tuple(
        Item(i, Fraction(draw(st.integers(lo, denominator))) / denominator, draw(st.integers(1, m)))
        for i in range(1, n + 1)
    )
    return GameInstance(items, m, CostModel(draw(st.sampled_from(models))))


@st.composite
def profiles(draw, instance):
    """A random capacity-respecting profile: items inserted at random positions of random bins."""
    bins: list[list[int]] = [[] for _ in range(instance.n)]
    loads = [Fraction(0)] * instance.n
    for it in draw(st.permutations(list(instance.items))):
        options = [j for j in range(instance.n) if loads[j] + it.size <= 1]
        j = draw(st.sampled_from(options))
        bins[j].insert(draw(st.integers(0, len(bins[j]))), it.id)
        loads[j] += it.size
    return Profile(instance, tuple(tuple(b) for b in bins))


@st.composite
def pools(draw, max_size=12, max_m=3, denominator=10):
    n = draw(st.integers(1, max_size))
    m = draw(st.integers(2, max_m))
    return [
        Item(i, Fraction(draw(st.integers(0, denominator)), denominator), draw(st.integers(1, m)))
        for i in range(1, n + 1)
    ]
