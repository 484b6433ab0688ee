import csv
import io
import json
from fractions import Fraction

import pytest

from ndniot.cli import main
from ndniot.report import COLUMNS, RunRow, mean_of, report_rows, scenario_rows, to_csv
from ndniot.scenario import (
    ScenarioError, expand_preset, load_presets, resolve_topology, scenario_from_dict,
)


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_presets_bundled():
    presets = load_presets()
    assert set(presets) == {"fig4-vif", "fig4-ronr", "fig5", "fig6"}
    assert [sc.k for sc in presets["fig4-vif"]] == [5, 10, 20]
    assert len(presets["fig5"]) == 6
    assert {sc.name for sc in presets["fig5"]} >= {"fig5-m3-cache0", "fig5-m3-cache20"}
    assert all(sc.runs == 20 for scs in presets.values() for sc in scs)


def test_scenario_dict_errors():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"topology": "sample10", "colour": 1})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"topology": "sample20", "m": 4})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"topology": "sample10", "routing": "zigzag"})
    with pytest.raises(ScenarioError):
        resolve_topology("/no/such/file.topo")


def test_expand_preset_names():
    scs = expand_preset({"name": "p", "topology": "line:5", "k": [1, 2], "routing": ["vif", "ronr"]})
    assert [s.name for s in scs] == ["p-k1-vif", "p-k1-ronr", "p-k2-vif", "p-k2-ronr"]


def test_bad_preset_file(tmp_path):
    bad = tmp_path / "p.json"
    bad.write_text('{"presets": [')
    with pytest.raises(ScenarioError):
        load_presets(bad)
    bad.write_text(json.dumps({"presets": [{"topology": "sample10"}]}))
    with pytest.raises(ScenarioError):
        load_presets(bad)


def test_sample_endpoints_respect_hop_rule():
    for scs in load_presets().values():
        for sc in scs:
            sc.validate(resolve_topology(sc.topology))


def test_rows_schema_and_exact_mean():
    sc = scenario_from_dict({"name": "x", "topology": "grid:3x3:0.7", "k": 4, "runs": 3,
                             "routing": "ronr"})
    rows = report_rows([sc])
    assert len(rows) == 4 and rows[-1]["seed"] == "mean"
    for r in rows:
        assert set(r) == set(COLUMNS)
        assert float(r["tx_total"]) == float(r["tx_broadcast"]) + float(r["tx_unicast"])
    per_run = [int(r["tx_total"]) for r in rows[:-1]]
    assert Fraction(rows[-1]["tx_total"]) == Fraction(round(Fraction(sum(per_run), 3), 3))


def test_mean_uses_exact_arithmetic():
    sc = scenario_from_dict({"topology": "line:4", "k": 1, "runs": 3})
    runs = [RunRow("run", s, 1, 0, 0, 1, 0, v) for s, v in ((1, 0.1), (2, 0.2), (3, 0.4))]
    mean = scenario_rows(sc, runs)[-1]
    assert mean["mean_chunk_latency_ms"] == "0.233"
    assert mean["tx_total"] == "1.000"


def test_model_columns():
    sc = scenario_from_dict({"topology": "line:5", "k": 5, "runs": 1})
    row = report_rows([sc])[0]
    assert row["model_value"] == "40.000"  # 5 * (4 + 4)
    assert row["deviation"] == "0.000"
    base = scenario_from_dict({"topology": "line:5", "k": 5, "runs": 1, "stack": "baseline"})
    assert report_rows([base])[0]["model_value"] == ""


def test_fig4_vif_grows_with_k():
    rows = report_rows(load_presets()["fig4-vif"])
    means = [mean_of(rows, f"fig4-vif-k{k}", "tx_total") for k in (5, 10, 20)]
    assert means == sorted(means) and len(set(means)) == 3


def test_parallel_sweep_same_rows():
    scs = [scenario_from_dict({"name": "a", "topology": "grid:2x3:0.8", "k": 3, "runs": 4}),
           scenario_from_dict({"name": "b", "topology": "line:5:0.9", "k": 2, "runs": 3})]
    assert to_csv(report_rows(scs, jobs=2)) == to_csv(report_rows(scs, jobs=1))


# -- CLI ----------------------------------------------------------------------------

def test_cli_run_is_deterministic(tmp_path, capsys):
    args = ["run", "--grid", "3x3", "--loss", "0.2", "--chunks", "5", "--runs", "1", "--seed", "9"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert first.splitlines()[0] == ",".join(COLUMNS)


def test_cli_run_outputs(tmp_path):
    out, trace = tmp_path / "o.csv", tmp_path / "t.tsv"
    rc = main(["run", "--line", "4", "--routing", "vif", "--chunks", "5", "--runs", "2",
               "--csv", str(out), "--trace", str(trace)])
    assert rc == 0
    rows = parse(out.read_text())
    assert [r["seed"] for r in rows] == ["1", "2", "mean"]
    assert rows[-1]["tx_total"] == "30.000" and rows[-1]["deviation"] == "0.000"
    assert trace.read_text().startswith("time_ms\tnode\tevent")


def test_cli_baseline_and_consumers(capsys):
    rc = main(["run", "--topology", "sample20", "--stack", "baseline", "--chunks", "2",
               "--runs", "1", "--consumers", "t9-149,t9-148"])
    assert rc == 0
    rows = parse(capsys.readouterr().out)
    assert rows[0]["stack"] == "baseline" and rows[0]["m"] == "2"


@pytest.mark.parametrize("args", [
    ["run", "--producer", "nope"],
    ["run", "--line", "2"],
    ["run", "--line", "4", "--loss", "1.5"],
    ["run", "--topology", "sample10", "--loss", "0.1"],
    ["run", "--onpc", "on"],
    ["run", "--line", "4", "--grid", "2x2"],
    ["presets", "no-such-preset"],
    ["verify", "--only", "bogus"],
])
def test_cli_config_errors(args, capsys):
    assert main(args) == 2
    assert "error" in capsys.readouterr().err


def test_cli_corrupt_preset_file(tmp_path, capsys):
    bad = tmp_path / "p.json"
    bad.write_text("{")
    assert main(["verify", "--presets", str(bad)]) == 2


def test_cli_presets_list(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "fig5-m3-cache20" in out


def test_cli_verify_subset(capsys):
    assert main(["verify", "--only", "fig4", "--only", "8"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("[PASS] 3.") and out[1].startswith("[PASS] 8.")
    assert out[-1] == "2/2 criteria passed"
