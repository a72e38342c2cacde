"""Colorful bin packing games: exact model, dynamics, equilibria and oracles."""

from .core import (
    INFINITE,
    CapExceeded,
    ColorCounts,
    CostModel,
    GameInstance,
    Item,
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
from .dynamics import (
    Deviation,
    apply_deviation,
    enumerate_improving_deviations,
    find_deviation_cycle,
    is_nash,
    potential_egalitarian,
    potential_proportional,
    run_dynamics,
    run_valid_dynamics,
)
from .equilibria import (
    algorithm1,
    algorithm2,
    colorful_subset_sum,
    max_cardinality_colorful_packing,
    order_bin,
)
from .oracle import enumerate_nash, exact_ratios, nash_classes, optimal_bins

__all__ = [
    "INFINITE",
    "CapExceeded",
    "ColorCounts",
    "CostModel",
    "Deviation",
    "GameInstance",
    "Item",
    "Profile",
    "StructureError",
    "algorithm1",
    "algorithm2",
    "apply_deviation",
    "colorful_subset_sum",
    "common_denominator",
    "enumerate_improving_deviations",
    "enumerate_nash",
    "exact_ratios",
    "find_deviation_cycle",
    "is_feasible",
    "is_misplaced",
    "is_nash",
    "load",
    "make_instance",
    "max_cardinality_colorful_packing",
    "nash_classes",
    "optimal_bins",
    "order_bin",
    "player_cost",
    "potential_egalitarian",
    "potential_proportional",
    "run_dynamics",
    "run_valid_dynamics",
    "social_cost",
    "top_color",
    "uniform_meta",
]
