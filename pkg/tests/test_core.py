from collections import Counter
from fractions import Fraction as F

import pytest
from hypothesis import given

from bruteforce import brute_orderable
from colorful_binpacking import (
    INFINITE,
    CostModel,
    Profile,
    StructureError,
    common_denominator,
    is_feasible,
    is_misplaced,
    load,
    make_instance,
    player_cost,
    social_cost,
    top_color,
    uniform_meta,
)
from colorful_binpacking.core import Item, orderable
from colorful_binpacking.instances import gen_poa3_uniform_odd
from strategies import instances, profiles

B, W, R = 1, 2, 3


def test_load_examples():
    inst = make_instance([(F(1, 4), B), (F(1, 4), W), (F(1, 3), B), (F(1, 2), W)], 2)
    assert load((1, 2), inst) == F(1, 2)
    assert load((), inst) == 0
    assert load((3, 4), inst) == F(5, 6)
    with pytest.raises(StructureError):
        load((9,), inst)


def test_misplaced_examples():
    inst = make_instance([(0, B), (0, W), (0, B)], 2)
    p = Profile.from_bins(inst, [(1, 2, 3)])
    assert not is_misplaced(p, 2)
    p = Profile.from_bins(inst, [(1, 3), (2,)])
    assert is_misplaced(p, 1) and is_misplaced(p, 3)
    assert not is_misplaced(p, 2)


def test_feasibility_examples():
    inst = make_instance([(0, B), (0, W), (0, B), (0, W)], 2)
    assert is_feasible(Profile.singletons(inst))
    assert not is_feasible(Profile.from_bins(inst, [(1, 3), (2, 4)]))
    assert is_feasible(Profile.from_bins(inst, [(1, 2, 3, 4)]))


def test_player_cost_examples():
    inst = make_instance([(F(1, 4), B), (F(1, 4), W)] * 2, 2)
    assert player_cost(Profile.from_bins(inst, [(1, 2, 3, 4)]), 1) == F(1, 4)
    bad = Profile.from_bins(inst, [(1, 3), (2, 4)])
    assert player_cost(bad, 1) == INFINITE
    assert player_cost(Profile.from_bins(bad.instance.with_cost_model("proportional"), bad.bins), 1) == INFINITE
    prop = make_instance([(F(1, 4), B), (F(1, 2), W)], 2, CostModel.PROPORTIONAL)
    assert player_cost(Profile.from_bins(prop, [(1, 2)]), 1) == F(1, 3)


def test_zero_load_bin_falls_back_to_equal_split():
    inst = make_instance([(0, B), (0, W)], 2, CostModel.PROPORTIONAL)
    assert player_cost(Profile.from_bins(inst, [(1, 2)]), 2) == F(1, 2)


def test_social_cost_examples():
    inst = make_instance([(F(1, 10), c) for c in (B, W, B, W, B)], 2)
    assert social_cost(Profile.from_bins(inst, [(1, 2, 3, 4, 5)])) == 1
    assert social_cost(Profile.singletons(inst)) == 5
    case = gen_poa3_uniform_odd(3)
    assert social_cost(case.witnesses["sigma"]) == 5


def test_top_color_examples():
    inst = make_instance([(0, B), (0, W), (0, R)], 3)
    assert top_color((1, 2), inst) == W
    assert top_color((), inst) is None
    assert top_color((2, 1, 3), inst) == R


def test_common_denominator_examples():
    assert common_denominator(make_instance([(F(1, 4), 1), (F(1, 4), 2)], 2)) == 4
    assert common_denominator(make_instance([(F(1, 3), 1), (F(1, 2), 2)], 2)) == 6
    assert common_denominator(make_instance([(0, 1)], 2)) == 1


def test_constructor_validation():
    with pytest.raises(StructureError):
        make_instance([(F(3, 2), 1)], 2)
    with pytest.raises(StructureError):
        make_instance([(F(1, 2), 3)], 2)
    with pytest.raises(StructureError):
        make_instance([(F(1, 2), 1)], 1)
    inst = make_instance([(F(2, 3), 1), (F(1, 2), 2)], 2)
    with pytest.raises(StructureError):
        Profile.from_bins(inst, [(1, 2)])
    with pytest.raises(StructureError):
        Profile.from_bins(inst, [(1,), (1, 2)])
    with pytest.raises(StructureError):
        Item(1, F(-1, 2), 1)


def test_uniform_meta():
    assert uniform_meta(make_instance([(F(1, 3), 1)] * 2, 2)).kappa == 3
    assert uniform_meta(make_instance([(F(2, 7), 1)] * 2, 2)).parity == "odd"
    with pytest.raises(StructureError):
        uniform_meta(make_instance([(F(1, 3), 1), (F(1, 4), 2)], 2))
    with pytest.raises(StructureError):
        uniform_meta(make_instance([(F(2, 3), 1)], 2))
    with pytest.raises(StructureError):
        uniform_meta(make_instance([(0, 1)], 2))


def test_canonical_key_ignores_bin_numbering():
    inst = make_instance([(0, B), (0, W), (0, B)], 2)
    a = Profile(inst, ((1, 2), (), (3,)))
    b = Profile(inst, ((), (3,), (1, 2)))
    assert a.canonical_key() == b.canonical_key() == ((3,), (1, 2))


@given(instances().flatmap(profiles))
def test_infinite_cost_iff_misplaced(profile):
    for it in profile.instance.items:
        assert (player_cost(profile, it.id) == INFINITE) == is_misplaced(profile, it.id)


@given(instances().flatmap(profiles))
def test_costs_in_feasible_bins_sum_to_one(profile):
    inst = profile.instance
    for b, ld in zip(profile.bins, profile.loads):
        if not b or any(is_misplaced(profile, i) for i in b):
            continue
        total = sum(player_cost(profile, i) for i in b)
        if inst.cost_model is CostModel.EGALITARIAN or ld > 0:
            assert total == 1


@given(instances().flatmap(profiles))
def test_feasible_bins_respect_dominant_bound(profile):
    if not is_feasible(profile):
        return
    for b in profile.bins:
        counts = Counter(profile.instance.color(i) for i in b)
        assert max(counts.values(), default=0) <= (len(b) + 1) // 2
    assert all(ld <= 1 for ld in profile.loads)


@given(instances(max_n=7, max_m=4))
def test_orderable_matches_permutation_search(instance):
    colors = [it.color for it in instance.items]
    assert orderable(Counter(colors)) == brute_orderable(colors)
