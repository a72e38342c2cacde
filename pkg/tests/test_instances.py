from collections import Counter
from fractions import Fraction as F

import pytest

from colorful_binpacking import (
    CostModel,
    find_deviation_cycle,
    is_feasible,
    is_nash,
    optimal_bins,
    social_cost,
    uniform_meta,
)
from colorful_binpacking.instances import (
    FAMILIES,
    gen_poa3_uniform_odd,
    gen_poa_unbounded_uniform,
    gen_pos2_uniform,
    gen_pos3_bw_egalitarian,
    gen_pos3_bw_proportional,
    gen_pos_m3_egalitarian,
    gen_pos_m3_proportional,
    gen_prop1,
    gen_random,
)
from colorful_binpacking.oracle import nash_classes


def type_counts(inst):
    return Counter((it.size, it.color) for it in inst.items)


def test_prop1():
    case = gen_prop1()
    inst = case.instance
    assert (inst.n, inst.m) == (6, 2) and {it.size for it in inst.items} == {F(1, 4)}
    assert uniform_meta(inst).kappa == 4
    assert optimal_bins(inst).opt == 2
    assert find_deviation_cycle(inst).found


def test_pos_m3_egalitarian_small():
    case = gen_pos_m3_egalitarian(3, 2, 3)
    d = case.expected["delta"]
    assert 0 < d < F(1, 2 * 3 * 4)
    assert type_counts(case.instance) == Counter({(F(1, 3) - 2 * d, 1): 6, (d, 2): 2, (d, 3): 2})
    assert is_feasible(case.witnesses["sigma_star"]) and social_cost(case.witnesses["sigma_star"]) == 2
    assert case.expected["ne_lower_bound"] == 0


def test_pos_m3_egalitarian_bound():
    case = gen_pos_m3_egalitarian(3, 4, 3)
    assert case.expected["ne_lower_bound"] == 3
    assert social_cost(case.witnesses["sigma"]) >= 3 and is_nash(case.witnesses["sigma"])


@pytest.mark.parametrize("args", [(2, 2, 2), (3, 1, 3), (3, 2, 4), (4, 2, 8)])
def test_pos_m3_egalitarian_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        gen_pos_m3_egalitarian(*args)


def test_pos_m3_proportional_sizes():
    case = gen_pos_m3_proportional(8)
    assert (case.expected["a"], case.expected["b"], case.expected["c"]) == (F(7, 8), F(1, 8), F(1, 32))
    star = case.witnesses["sigma_star"]
    assert is_feasible(star) and social_cost(star) == 2
    assert optimal_bins(case.instance).opt == 2
    assert case.instance.cost_model is CostModel.PROPORTIONAL


def test_pos_m3_proportional_many_small_singletons():
    case = gen_pos_m3_proportional(16)
    assert is_nash(case.witnesses["sigma"])
    assert case.expected["small_singletons"] >= 16 // 2 - 5


@pytest.mark.parametrize("gen", [gen_pos3_bw_egalitarian, gen_pos3_bw_proportional])
def test_pos3_families_at_k4(gen):
    case = gen(4)
    assert sorted(type_counts(case.instance).values()) == sorted([8, 2, 8, 4])
    assert social_cost(case.witnesses["sigma"]) == 7 and social_cost(case.witnesses["sigma_star"]) == 4
    assert case.expected["ratio"] == F(7, 4) == 3 - F(10, 8)
    assert is_nash(case.witnesses["sigma"]) and is_feasible(case.witnesses["sigma_star"])


def test_pos3_delta_bounds():
    k = 4
    d = gen_pos3_bw_egalitarian(k).expected["delta"]
    assert 0 < d and (k + 1) * (F(1, k) - 2 * d) > 1
    d = gen_pos3_bw_proportional(k).expected["delta"]
    assert 0 < d < F(1, k * (5 * k + 3))


@pytest.mark.parametrize("gen", [gen_pos3_bw_egalitarian, gen_pos3_bw_proportional, gen_pos2_uniform])
def test_even_k_required(gen):
    for k in (0, 3):
        with pytest.raises(ValueError):
            gen(k)


def test_pos2_uniform():
    case = gen_pos2_uniform(2)
    assert Counter(it.color for it in case.instance.items) == Counter({2: 2, 1: 1})
    assert uniform_meta(case.instance).kappa == 2
    assert {c.social_cost for c in nash_classes(case.instance)} == {2}
    case = gen_pos2_uniform(4)
    assert social_cost(case.witnesses["sigma_star"]) == 3 and social_cost(case.witnesses["sigma"]) == 4
    assert case.expected["ratio"] == F(4, 3)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_poa_unbounded(k):
    case = gen_poa_unbounded_uniform(k)
    assert optimal_bins(case.instance).opt == 1
    assert social_cost(case.witnesses["sigma"]) == 2 * k and is_nash(case.witnesses["sigma"])
    odd = gen_poa_unbounded_uniform(k, odd_variant=True)
    assert uniform_meta(odd.instance).kappa == 4 * k + 1
    assert social_cost(odd.witnesses["sigma"]) == 2 * k and social_cost(odd.witnesses["sigma_star"]) == 1


def test_poa_unbounded_k1_witness_shape():
    case = gen_poa_unbounded_uniform(1)
    inst = case.instance
    shapes = sorted(tuple(inst.color(i) for i in b) for b in case.witnesses["sigma"].bins if b)
    assert shapes == [(1,), (2, 3, 1)]


@pytest.mark.parametrize("k", [3, 5, 7])
def test_poa3_uniform_odd(k):
    case = gen_poa3_uniform_odd(k)
    colors = Counter(it.color for it in case.instance.items)
    assert colors[2] == (k * k + 4 * k - 1) // 4 and colors[1] == (k + 1) ** 2 // 4
    assert case.expected["ratio"] == F(3 * k + 1, k + 3) == case.expected["ratio_formula"]
    assert optimal_bins(case.instance).opt == (k + 1) // 2 + 1


def test_random_is_deterministic():
    a = gen_random(4, 2, "uniform", seed=7, kappa=2)
    assert a == gen_random(4, 2, "uniform", seed=7, kappa=2)
    assert {it.size for it in a.items} == {F(1, 2)}
    g = gen_random(8, 3, "grid", seed=1, denominator=10)
    assert all((it.size * 10).denominator == 1 and 0 < it.size <= F(1, 2) for it in g.items)
    z = gen_random(30, 2, "zero-heavy", seed=3)
    assert any(it.size == 0 for it in z.items)
    with pytest.raises(ValueError):
        gen_random(3, 2, "gaussian")


def test_registry_builds_every_family():
    defaults = {"m": 3, "h": 2, "k": 4, "n": 8, "odd_variant": False}
    odd_k = {"poa3_uniform_odd": 3, "pos_m3_egalitarian": 3}
    for name, fam in FAMILIES.items():
        params = {p: defaults[p] for p in fam.params}
        if name in odd_k:
            params["k"] = odd_k[name]
        case = fam.build(**params)
        assert all(ok for _, ok in case.verify())
