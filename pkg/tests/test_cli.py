import json

import pytest

from colorful_binpacking.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return path
    return _write


def items(*spec):
    return [{"id": i, "size": s, "color": c} for i, (s, c) in enumerate(spec, start=1)]


def test_solve_alg2(capsys, write):
    inst = write("i.json", {"m": 3, "cost_model": "egalitarian", "items": items(*[("1/4", c) for c in (1, 1, 2, 3)])})
    code, out = run(capsys, "solve", "--alg", "alg2", inst)
    report = json.loads(out)
    assert code == 0 and report["F"] == 1 and report["is_nash"]


def test_solve_alg1_single_item(capsys, write):
    inst = write("i.json", {"m": 2, "items": items(("1/2", 1))})
    code, out = run(capsys, "solve", inst)
    assert code == 0 and json.loads(out)["F"] == 1


def test_solve_alg1_on_family_case(capsys, tmp_path):
    case = tmp_path / "c.json"
    assert run(capsys, "generate", "pos3_bw_egalitarian", "--param", "k=4", "--out", case)[0] == 0
    code, out = run(capsys, "solve", case)
    assert code == 0 and json.loads(out)["is_nash"]


def test_alg2_rejects_mixed_sizes(capsys, write):
    inst = write("i.json", {"m": 2, "items": items(("1/2", 1), ("1/3", 2))})
    assert run(capsys, "solve", "--alg", "alg2", inst)[0] == 4


def test_bad_input_codes(capsys, write, tmp_path):
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 4
    bad = write("bad.json", {"m": 2, "items": [{"id": 1, "size": 0.5, "color": 1}]})
    assert run(capsys, "solve", bad)[0] == 4
    assert run(capsys, "generate", "pos2_uniform", "--param", "k=3")[0] == 4
    assert run(capsys, "bogus")[0] == 4


def test_dynamics_cycle_and_valid_runs(capsys, tmp_path):
    case = tmp_path / "p.json"
    run(capsys, "generate", "prop1", "--out", case)
    code, out = run(capsys, "dynamics", case, "--allow-nonvalid")
    assert code == 0 and json.loads(out)["cycle_search"]["cycle"] is True
    for seed in range(10):
        code, out = run(capsys, "dynamics", case, "--policy", "random", "--seed", seed)
        report = json.loads(out)
        assert code == 0 and report["terminal_is_nash"] and report["potential_increasing"]
        pots = [int(s["potential"]) for s in report["trace"]["steps"]]
        assert pots == sorted(set(pots))


def test_dynamics_cycle_cap_env(capsys, tmp_path, monkeypatch):
    case = tmp_path / "p.json"
    run(capsys, "generate", "prop1", "--out", case)
    monkeypatch.setenv("COLORBIN_CYCLE_CAP", "3")
    assert run(capsys, "dynamics", case, "--allow-nonvalid")[0] == 3


def test_oracle_command(capsys, tmp_path, monkeypatch):
    case = tmp_path / "c.json"
    run(capsys, "generate", "poa3_uniform_odd", "--param", "k=3", "--out", case)
    code, out = run(capsys, "oracle", case, "--ratios")
    report = json.loads(out)
    assert code == 0 and report["optimum"]["opt"] == 3 and report["ratios"]["poa"] == "5/3"
    monkeypatch.setenv("COLORBIN_OPT_CAP", "4")
    assert run(capsys, "oracle", case)[0] == 3


def test_ratios_family_sweep(capsys):
    code, out = run(capsys, "ratios", "--family", "poa3_uniform_odd", "--values", 3, 5, 7)
    rows = out.strip().splitlines()
    assert code == 0 and rows[0].startswith("instance_id,n,m,model,opt,best_ne,worst_ne,pos,poa")
    assert [r.split(",")[8] for r in rows[1:]] == ["5/3", "2", "11/5"]


def test_ratios_two_items_and_skips(capsys, write, monkeypatch):
    inst = write("pair.json", {"m": 2, "items": items(("1/2", 1), ("1/2", 2))})
    code, out = run(capsys, "ratios", inst)
    assert out.splitlines()[1].split(",")[7:9] == ["1", "1"]
    monkeypatch.setenv("COLORBIN_OPT_CAP", "1")
    code, out = run(capsys, "ratios", inst)
    assert code == 0 and out.strip().endswith("skipped")


def test_verify_passes_and_detects_tampering(capsys, tmp_path):
    case = tmp_path / "c.json"
    run(capsys, "generate", "poa3_uniform_odd", "--param", "k=3", "--out", case)
    code, out = run(capsys, "verify", case)
    assert code == 0 and json.loads(out)["passed"]

    data = json.loads(case.read_text())
    bins = data["witnesses"]["sigma"]["bins"]
    moved = bins[0].pop()
    empty = next(i for i, b in enumerate(bins) if not b)
    bins[empty].append(moved)
    case.write_text(json.dumps(data))
    code, out = run(capsys, "verify", case)
    report = json.loads(out)
    assert code == 2
    assert {c["check"]: c["result"] for c in report["checks"]}["sigma is an equilibrium"] == "fail"


def test_verify_pos2_all_equilibria(capsys, tmp_path):
    case = tmp_path / "c.json"
    run(capsys, "generate", "pos2_uniform", "--param", "k=2", "--out", case)
    code, out = run(capsys, "verify", case)
    checks = {c["check"]: c["result"] for c in json.loads(out)["checks"]}
    assert code == 0 and checks["every equilibrium has 2 bins"] == "pass"


def test_outputs_are_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.csv"
        run(capsys, "ratios", "--random", 4, "--n", 5, "--seed", 11, "--out", path)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    case = tmp_path / "p.json"
    run(capsys, "generate", "prop1", "--out", case)
    a = run(capsys, "dynamics", case, "--policy", "random", "--seed", 4)[1]
    b = run(capsys, "dynamics", case, "--policy", "random", "--seed", 4)[1]
    assert a == b


def test_emitted_profiles_reload(capsys, tmp_path):
    from colorful_binpacking.jsonio import case_from_dict, case_to_dict

    case = tmp_path / "c.json"
    run(capsys, "generate", "pos3_bw_proportional", "--param", "k=4", "--out", case)
    data = json.loads(case.read_text())
    again = case_to_dict(case_from_dict(data))
    assert again == data
