"""JSON round-tripping for instances, profiles, generated cases and traces.

Sizes and other rationals are written as ``"p/q"`` strings so nothing is lost.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .core import CostModel, GameInstance, Item, Profile, StructureError
from .dynamics import CycleSearchResult, DynamicsTrace
from .instances import GeneratedCase


def frac_str(x: Fraction | int) -> str:
    return str(Fraction(x))


def parse_frac(text: Any) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise StructureError(f"expected an exact fraction string, got {text!r}")
    return Fraction(text)


def instance_to_dict(instance: GameInstance) -> dict:
    return {
        "m": instance.m,
        "cost_model": instance.cost_model.value,
        "items": [{"id": it.id, "size": frac_str(it.size), "color": it.color} for it in instance.items],
    }


def instance_from_dict(data: dict) -> GameInstance:
    try:
        items = tuple(Item(int(d["id"]), parse_frac(d["size"]), int(d["color"])) for d in data["items"])
        return GameInstance(items, int(data["m"]), CostModel(data.get("cost_model", "egalitarian")))
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed instance: {exc}") from exc


def profile_to_dict(profile: Profile) -> dict:
    # empty bins are kept so that bin indices in deviations stay meaningful
    return {"bins": [list(b) for b in profile.bins]}


def profile_from_dict(instance: GameInstance, data: dict) -> Profile:
    try:
        return Profile.from_bins(instance, [tuple(int(i) for i in b) for b in data["bins"]])
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed profile: {exc}") from exc


def _value_to_json(v: Any) -> Any:
    if isinstance(v, Fraction):
        return frac_str(v)
    return v


def case_to_dict(case: GeneratedCase) -> dict:
    return {
        "provenance": case.provenance,
        "params": dict(case.params),
        "instance": instance_to_dict(case.instance),
        "witnesses": {name: profile_to_dict(p) for name, p in sorted(case.witnesses.items())},
        "expected": {k: _value_to_json(v) for k, v in sorted(case.expected.items())},
    }


def case_from_dict(data: dict) -> GeneratedCase:
    inst = instance_from_dict(data["instance"])
    witnesses = {name: profile_from_dict(inst, p) for name, p in data.get("witnesses", {}).items()}
    expected = {}
    for k, v in data.get("expected", {}).items():
        expected[k] = parse_frac(v) if isinstance(v, str) else v
    return GeneratedCase(inst, witnesses, expected, data.get("provenance", ""), data.get("params", {}))


def trace_to_dict(trace: DynamicsTrace) -> dict:
    return {
        "initial": profile_to_dict(trace.initial),
        "initial_potential": str(trace.potentials[0]),
        "steps": [
            {
                "item": s.deviation.item_id,
                "target_bin": s.deviation.target_bin,
                "valid": s.deviation.valid,
                "F": sum(1 for b in s.profile.bins if b),
                "potential": str(s.potential),
            }
            for s in trace.steps
        ],
        "terminal": profile_to_dict(trace.terminal),
        "terminated": trace.terminated,
        "valid_only": trace.valid_only,
    }


def cycle_to_dict(result: CycleSearchResult) -> dict:
    out: dict = {"status": result.status, "cycle": result.found, "states_explored": result.states_explored}
    if result.cycle:
        out["walk"] = [
            {"profile": profile_to_dict(p), "item": d.item_id, "target_bin": d.target_bin, "valid": d.valid}
            for p, d in result.cycle
        ]
    return out


def load_instance_any(data: dict) -> GameInstance:
    """Accept either a bare instance or a generated case."""
    return instance_from_dict(data["instance"] if "instance" in data else data)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
