import copy
import json

import pytest

from goiot import cli, results, simcore
from goiot.errors import DanglingReference, InputError, ParseError, SchemaError
from goiot.scenario import SCENARIO_DIR_ENV, load_scenario, scenario_from_dict


def test_repro_scenario_values(repro):
    assert repro.simulation.frames == 43200
    assert repro.simulation.frame_interval == 60.0
    assert repro.radio.alpha == 50e6 and repro.radio.p_t == 0.2
    assert repro.radio.p_pa == 390.0 and repro.radio.eta == 0.27
    gflop = [repro.models[m].gflop for m in ("640N", "640S", "640M", "640L", "640X")]
    assert gflop == [6.61, 21.71, 68.5, 87.6, 195.9]
    assert repro.models["320N"].gflop == 1.6
    assert repro.hardware["rpi5"].frequency == 2.4e9
    assert repro.hardware["atom-x6214re"].gflops == 44


def test_minimal_scenario(minimal):
    assert list(minimal.strategies) == ["t"]
    assert minimal.plan_for("t").runs == 3


def test_unknown_hardware(minimal_raw):
    minimal_raw["topology"]["nodes"][1]["hardware"] = "gpu"
    with pytest.raises(DanglingReference) as exc:
        scenario_from_dict(minimal_raw)
    assert "gpu" in str(exc.value)


def test_unknown_model(minimal_raw):
    minimal_raw["strategies"][0]["cloud_stage"]["model"] = "ghost"
    with pytest.raises(DanglingReference):
        scenario_from_dict(minimal_raw)


def test_missing_schema_version(minimal_raw):
    del minimal_raw["schema_version"]
    with pytest.raises(SchemaError):
        scenario_from_dict(minimal_raw)


def test_bad_json(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    with pytest.raises(ParseError):
        load_scenario(f)


def _paths(obj, prefix=()):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield prefix + (k,)
            yield from _paths(v, prefix + (k,))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield prefix + (i,)
            yield from _paths(v, prefix + (i,))


def _delete(raw, path):
    out = copy.deepcopy(raw)
    node = out
    for k in path[:-1]:
        node = node[k]
    del node[path[-1]]
    return out


def test_field_deletion_fuzz(minimal_raw):
    # Every deletion either still yields a usable scenario or fails at load time
    # with an input error; nothing may slip through and crash later.
    for path in _paths(minimal_raw):
        raw = _delete(minimal_raw, path)
        try:
            sc = scenario_from_dict(raw)
        except InputError:
            continue
        for sid in sc.strategies:
            plan = sc.plan_for(sid, runs=2)
            simcore.run_plan(plan)


def test_scenario_dir_env(tmp_path, monkeypatch, minimal_raw):
    (tmp_path / "mini.json").write_text(json.dumps(minimal_raw))
    monkeypatch.setenv(SCENARIO_DIR_ENV, str(tmp_path))
    assert load_scenario("mini").name == "minimal"


# results ---------------------------------------------------------------------------

def _table():
    t = results.ResultTable(("name", "energy_J", "count_count"))
    t.add(name="a", energy_J=1.23456789, count_count=3)
    t.add(name="b", energy_J=1e-9, count_count=0)
    return t


def test_emit_empty_table(tmp_path):
    out = tmp_path / "x.csv"
    with pytest.raises(InputError):
        results.emit_results(results.ResultTable(("a",)), "csv", out)
    assert not out.exists()


def test_csv_format():
    text = results.to_csv(_table())
    assert text.splitlines()[0] == "name,energy_J,count_count"
    assert text.splitlines()[1] == "a,1.23457,3"
    assert text.endswith("\n")


def test_round_trip():
    csv1 = results.to_csv(_table())
    back = results.from_json(results.to_json(results.from_csv(csv1)))
    assert results.to_csv(back) == csv1


def test_simulation_columns_have_units():
    for col in (*results.SIMULATION_COLUMNS, *results.PLACEMENT_COLUMNS):
        text_keys = {"strategy", "kind", "models", "family", "candidate", "compute_node", "paths", "objective"}
        assert col in text_keys or col.rsplit("_", 1)[-1] in {"J", "s", "B", "frac", "count", "flag"}


# CLI -------------------------------------------------------------------------------

def test_cli_validate():
    assert cli.main(["validate"]) == 0


def test_cli_optimize_infeasible(capsys):
    assert cli.main(["optimize", "--eps-accuracy", "1.01"]) == 1
    assert "infeasible" in capsys.readouterr().err


def test_cli_missing_scenario(capsys):
    assert cli.main(["validate", "--scenario", "/nonexistent/x.json"]) == 2


def test_cli_bad_frequency_list():
    assert cli.main(["sweep", "--frequencies", "0.5..2", "--runs", "1"]) == 2
    assert cli.main(["simulate", "--runs", "0"]) == 2


def test_parse_frequencies():
    assert cli.parse_frequencies("0.1..1.0") == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    assert cli.parse_frequencies("0.2,0.4") == [0.2, 0.4]
    assert cli.parse_frequencies("0..1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]


def test_cli_pareto_tiot(tmp_path, repro):
    out = tmp_path / "front.json"
    assert cli.main(["pareto", "--format", "json", "--output", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert {r["candidate"]: r["compute_node"] for r in rows} == {
        "320N": "edge", "640N": "edge", "640S": "edge", "640M": "edge", "640L": "edge", "640X": "remote"}
    inacc = [r["inaccuracy_frac"] for r in rows]
    assert inacc == sorted(inacc)


def test_cli_simulate_table_shape(tmp_path):
    out = tmp_path / "sim.csv"
    rc = cli.main(["simulate", "--runs", "2", "--seed", "1", "--output", str(out)])
    assert rc == 0
    table = results.from_csv(out.read_text())
    assert len(table.rows) == 5
    for row in table.rows:
        comps = [row[f"{c}_J"] for c in ("ue_proc", "ue_trans", "ap_recv", "ap_proc", "tn", "upf", "cloud_proc")]
        assert all(v is not None for v in comps)
    flagged = [r for r in table.rows if r["pareto_flag"]]
    cheapest = min(table.rows, key=lambda r: r["energy_total_J"])
    best = min(table.rows, key=lambda r: r["inaccuracy_frac"])
    assert cheapest in flagged and best in flagged


def test_cli_latency_objective(capsys):
    assert cli.main(["optimize", "--objective", "latency", "--eps-accuracy", "0.99", "--format", "json"]) == 0
    row = json.loads(capsys.readouterr().out)["rows"][0]
    assert row["candidate"] == "640X" and row["compute_node"] == "edge"
